"""Scheduling n jobs on m identical machines under a conflict graph,
minimizing the total completion time.

Modules: core (types, feasibility, objective), instances (generator and file
format), graphs (agreement graph, matching, greedy independent sets), bounds
(LB1..LB4), polycases (exact structured solvers), decoders (permutation to
schedule), ga (genetic algorithm and local search), milp (model export and
solver-result ingest), exact (desk-scale oracles), cli (command line).
"""

from .core import Chromosome, Instance, MetricReport, Schedule, check_feasible, metrics, total_flow_time

__all__ = [
    "Chromosome",
    "Instance",
    "MetricReport",
    "Schedule",
    "check_feasible",
    "metrics",
    "total_flow_time",
]

__version__ = "0.1.0"

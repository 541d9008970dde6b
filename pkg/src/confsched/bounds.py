"""Combinatorial lower bounds on the total completion time.

* LB1 relaxes the conflict constraints entirely; the remaining problem is
  solved exactly by the SPT rule on m machines.
* LB2..LB4 find a heavy set of pairwise-conflicting jobs (an independent set
  in the weighted agreement graph, via GWMIN / GWMIN2 / GWMAX) and charge the
  cost of running that set sequentially in SPT order.

MILP-relaxation bounds are not computed here: models are exported by the
milp module and an external solver's bound re-enters through
milp.ingest_solver_result.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import Instance
from .graphs import GWMAX, GWMIN, GWMIN2, agreement_graph, greedy_wis

BOUND_NAMES = ("LB1", "LB2", "LB3", "LB4")


@dataclass
class BoundReport:
    lb1: int
    lb2: int
    lb3: int
    lb4: int
    best: int
    best_source: str
    wall_times: dict[str, float] = field(default_factory=dict)

    def values(self) -> dict[str, int]:
        return {"LB1": self.lb1, "LB2": self.lb2, "LB3": self.lb3, "LB4": self.lb4}


def lb_spt(inst: Instance) -> int:
    """Optimal sum of completion times with conflicts relaxed (Pm || sum C_j).

    Sorted by decreasing processing time, the job in position r (1-based)
    contributes ceil(r / m) times its processing time.
    """
    p_desc = np.sort(inst.proc)[::-1]
    ranks = np.arange(1, inst.n + 1)
    mult = -(-ranks // inst.m)  # ceil division
    return int(np.sum(mult * p_desc))


def sequential_spt(proc) -> int:
    """Sum of completion times of jobs run back-to-back in SPT order."""
    p = np.sort(np.asarray(proc, dtype=np.int64))
    return int(np.cumsum(p).sum())


def lb_wis(inst: Instance, rule: str) -> int:
    """Independent-set bound: a pairwise-conflicting job set must run
    sequentially, costing at least its sequential SPT value."""
    chosen = greedy_wis(agreement_graph(inst), rule)
    return sequential_spt(inst.proc[chosen])


def best_bound(inst: Instance) -> BoundReport:
    """All four bounds with per-bound wall times; ties go to the lowest index."""

    def timed(fn):
        t0 = time.perf_counter()
        value = fn()
        return value, time.perf_counter() - t0

    lb1, t1 = timed(lambda: lb_spt(inst))
    lb2, t2 = timed(lambda: lb_wis(inst, GWMIN))
    lb3, t3 = timed(lambda: lb_wis(inst, GWMIN2))
    lb4, t4 = timed(lambda: lb_wis(inst, GWMAX))

    values = [lb1, lb2, lb3, lb4]
    best_idx = int(np.argmax(values))  # argmax returns the first maximizer
    return BoundReport(
        lb1=lb1,
        lb2=lb2,
        lb3=lb3,
        lb4=lb4,
        best=values[best_idx],
        best_source=BOUND_NAMES[best_idx],
        wall_times={"LB1": t1, "LB2": t2, "LB3": t3, "LB4": t4},
    )

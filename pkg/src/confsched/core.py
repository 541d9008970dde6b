"""Domain types and objective evaluation for conflict-constrained machine scheduling.

Jobs with integer processing times run on m identical machines. A symmetric,
irreflexive conflict relation forbids two jobs from running concurrently on
different machines. The objective throughout the package is the total
completion time sum(C_j), with C_j = start_j + p_j.

All times are integers and intervals are half-open [s, s + p), so jobs may
butt-join on one machine and conflicting jobs may touch end-to-start.
Zero-length jobs occupy no time and never cause a violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


class StructuralError(ValueError):
    """Dimension mismatch or malformed input (not a mere infeasibility)."""


@dataclass(frozen=True, eq=False)
class Instance:
    """A problem instance: machine count, processing times, conflict graph.

    `proc` is an integer vector of length n; `conflicts` is an n x n boolean
    adjacency matrix that must be symmetric with an all-False diagonal.
    Job indices are 0-based internally; file formats use 1-based labels.
    """

    m: int
    proc: np.ndarray
    conflicts: np.ndarray
    id: str | None = None

    def __post_init__(self):
        proc = np.asarray(self.proc, dtype=np.int64)
        conf = np.ascontiguousarray(np.asarray(self.conflicts, dtype=bool))
        object.__setattr__(self, "proc", proc)
        object.__setattr__(self, "conflicts", conf)
        n = proc.shape[0]
        if proc.ndim != 1 or n < 1:
            raise StructuralError("proc must be a non-empty vector")
        if np.any(proc < 0):
            raise StructuralError("processing times must be non-negative")
        if self.m < 1:
            raise StructuralError(f"machine count must be >= 1, got {self.m}")
        if conf.shape != (n, n):
            raise StructuralError(f"conflict matrix must be {n}x{n}, got {conf.shape}")
        if not np.array_equal(conf, conf.T):
            raise StructuralError("conflict matrix must be symmetric")
        if np.any(np.diag(conf)):
            raise StructuralError("conflict matrix must have an all-False diagonal")

    @property
    def n(self) -> int:
        return self.proc.shape[0]

    def conflict_degrees(self) -> np.ndarray:
        """Number of jobs each job may not run in parallel with."""
        return self.conflicts.sum(axis=1).astype(np.int64)

    def conflict_pairs(self) -> list[tuple[int, int]]:
        """All conflicting pairs (j, k) with j < k."""
        ju, ku = np.triu_indices(self.n, 1)
        mask = self.conflicts[ju, ku]
        return list(zip(ju[mask].tolist(), ku[mask].tolist()))

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.m == other.m
            and self.id == other.id
            and np.array_equal(self.proc, other.proc)
            and np.array_equal(self.conflicts, other.conflicts)
        )

    def __hash__(self):
        return hash((self.m, self.id, self.proc.tobytes(), self.conflicts.tobytes()))


@dataclass
class Schedule:
    """Per-job machine assignment and integer start time."""

    machine_of: np.ndarray
    start_of: np.ndarray

    def __post_init__(self):
        self.machine_of = np.asarray(self.machine_of, dtype=np.int64)
        self.start_of = np.asarray(self.start_of, dtype=np.int64)

    def completions(self, inst: Instance) -> np.ndarray:
        return self.start_of + inst.proc

    def __eq__(self, other):
        if not isinstance(other, Schedule):
            return NotImplemented
        return np.array_equal(self.machine_of, other.machine_of) and np.array_equal(
            self.start_of, other.start_of
        )


@dataclass
class Chromosome:
    """A job permutation with its cached objective value, once evaluated."""

    perm: list[int]
    fitness: int | None = None

    def is_permutation(self, n: int) -> bool:
        return len(self.perm) == n and sorted(self.perm) == list(range(n))


@dataclass
class MetricReport:
    """Deviation/gap record. Fractions are exact; None marks an undefined ratio."""

    best_lb: int
    best_ub: int
    deviation_from_lb: Fraction | None
    gap: Fraction | None


def _check_dims(inst: Instance, sched: Schedule) -> None:
    n = inst.n
    if sched.machine_of.shape != (n,) or sched.start_of.shape != (n,):
        raise StructuralError(
            f"schedule vectors must have length {n}, got "
            f"{sched.machine_of.shape} and {sched.start_of.shape}"
        )
    if np.any(sched.machine_of < 0) or np.any(sched.machine_of >= inst.m):
        raise StructuralError("machine index out of range")


def _overlap(s1: int, p1: int, s2: int, p2: int) -> bool:
    # Half-open intervals; a zero-length job never overlaps anything.
    return s1 < s2 + p2 and s2 < s1 + p1


def check_feasible(inst: Instance, sched: Schedule) -> bool:
    """True iff no machine runs two jobs at once and no conflicting jobs overlap.

    Pairwise interval test over all job pairs; machine disjointness applies to
    same-machine pairs, conflict disjointness to conflicting pairs regardless
    of machine. Negative starts are infeasible.
    """
    _check_dims(inst, sched)
    if np.any(sched.start_of < 0):
        return False
    n = inst.n
    p = inst.proc
    s = sched.start_of
    mach = sched.machine_of
    for j in range(n):
        if p[j] == 0:
            continue
        for k in range(j + 1, n):
            if p[k] == 0:
                continue
            if mach[j] == mach[k] or inst.conflicts[j, k]:
                if _overlap(s[j], p[j], s[k], p[k]):
                    return False
    return True


def check_feasible_scanline(inst: Instance, sched: Schedule) -> bool:
    """Redundant feasibility check: per-machine sort-and-scan plus conflict pairs.

    Must always agree with `check_feasible`; kept as an independent
    cross-check of the interval logic.
    """
    _check_dims(inst, sched)
    if np.any(sched.start_of < 0):
        return False
    p = inst.proc
    s = sched.start_of
    for i in range(inst.m):
        jobs = [j for j in np.flatnonzero(sched.machine_of == i) if p[j] > 0]
        jobs.sort(key=lambda j: (s[j], s[j] + p[j]))
        for prev, cur in zip(jobs, jobs[1:]):
            if s[cur] < s[prev] + p[prev]:
                return False
    for j, k in inst.conflict_pairs():
        if p[j] > 0 and p[k] > 0 and _overlap(s[j], p[j], s[k], p[k]):
            return False
    return True


def total_flow_time(inst: Instance, sched: Schedule) -> int:
    """Sum over jobs of start + processing time."""
    _check_dims(inst, sched)
    return int(np.sum(sched.start_of + inst.proc))


def metrics(best_lb: int, best_ub: int, value: int) -> MetricReport:
    """Deviation of `value` from the best lower bound and the LB/UB gap.

    deviation = (value - best_lb) / best_lb, gap = (best_ub - best_lb) / best_ub,
    both as exact fractions. A zero denominator yields None rather than NaN.
    """
    if best_lb > best_ub:
        raise StructuralError(f"best_lb {best_lb} exceeds best_ub {best_ub}")
    deviation = Fraction(value - best_lb, best_lb) if best_lb > 0 else None
    gap = Fraction(best_ub - best_lb, best_ub) if best_ub > 0 else None
    return MetricReport(best_lb=best_lb, best_ub=best_ub, deviation_from_lb=deviation, gap=gap)

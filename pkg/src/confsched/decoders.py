"""Permutation-to-schedule builders over a shared earliest-start mechanism.

Four variants turn a job permutation into a feasible schedule:

* ``fifo``  schedules the first job of the permutation, always;
* ``ectf``  schedules the first job with the minimum earliest completion time;
* ``gt``    Giffler-Thompson style: find the first job j' with minimum
  earliest completion time, then schedule the first job of the permutation
  that is j' or conflicts with j' and can start before j' would complete;
* ``nd``    schedules the first job with the minimum earliest start time,
  producing non-delay schedules (the first three produce active schedules).

All variants share one mechanism: an m x n matrix of earliest
machine-feasible starts, initialized to zero. Placing job j at its earliest
start raises, for every remaining job, the entry of j's machine to C_j, and
raises every machine entry of jobs conflicting with j to C_j (forward-only:
gaps opened by conflict waits are never refilled). The chosen machine is the
lowest-indexed one attaining the job's earliest start; all job tie-breaks go
to the earliest position in the permutation.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import Chromosome, Instance, Schedule, StructuralError
from . import _kernels

FIFO = "fifo"
GT = "gt"
ECTF = "ectf"
ND = "nd"
VARIANTS = (FIFO, GT, ECTF, ND)

_VARIANT_CODES = {FIFO: _kernels.VAR_FIFO, GT: _kernels.VAR_GT, ECTF: _kernels.VAR_ECTF, ND: _kernels.VAR_ND}


class StartMatrix:
    """Earliest machine-feasible start times s_j^i for the decoders.

    Both update kinds are max-updates that hit a whole machine column or a
    whole job row, so the matrix factors exactly into a per-machine release
    level and a per-job conflict release level:

        s_j^i = max(machine_release[i], conflict_release[j])

    which this class stores instead of the dense matrix. Entries only ever
    increase over a decode run.
    """

    def __init__(self, inst: Instance):
        self.inst = inst
        self.machine_release = [0] * inst.m
        self.conflict_release = [0] * inst.n

    def earliest_start(self, j: int) -> int:
        """s_j = min over machines of s_j^i."""
        return max(self.conflict_release[j], min(self.machine_release))

    def earliest_completion(self, j: int) -> int:
        return self.earliest_start(j) + int(self.inst.proc[j])

    def entry(self, i: int, j: int) -> int:
        return max(self.machine_release[i], self.conflict_release[j])

    def as_matrix(self) -> np.ndarray:
        return np.maximum.outer(
            np.array(self.machine_release, dtype=np.int64),
            np.array(self.conflict_release, dtype=np.int64),
        )

    def place(self, j: int) -> tuple[int, int, int]:
        """Schedule job j at its earliest start and propagate the updates.

        Returns (machine, start, completion). The machine is the lowest index
        attaining the earliest start.
        """
        s = self.earliest_start(j)
        machine = next(i for i, rel in enumerate(self.machine_release) if rel <= s)
        c = s + int(self.inst.proc[j])
        self.machine_release[machine] = c
        for k in np.flatnonzero(self.inst.conflicts[j]):
            if self.conflict_release[k] < c:
                self.conflict_release[k] = c
        return machine, s, c


def _as_perm(inst: Instance, perm) -> list[int]:
    if isinstance(perm, Chromosome):
        perm = perm.perm
    perm = [int(j) for j in perm]
    if sorted(perm) != list(range(inst.n)):
        raise StructuralError("perm must be a permutation of 0..n-1")
    return perm


def _select(variant: str, order: list[int], sm: StartMatrix) -> int:
    """Position in `order` of the job the variant schedules next."""
    if variant == FIFO:
        return 0

    if variant == ECTF:
        best_pos, best_ect = 0, sm.earliest_completion(order[0])
        for pos in range(1, len(order)):
            ect = sm.earliest_completion(order[pos])
            if ect < best_ect:
                best_pos, best_ect = pos, ect
        return best_pos

    if variant == ND:
        best_pos, best_s = 0, sm.earliest_start(order[0])
        for pos in range(1, len(order)):
            s = sm.earliest_start(order[pos])
            if s < best_s:
                best_pos, best_s = pos, s
        return best_pos

    if variant == GT:
        jp_pos, jp_ect = 0, sm.earliest_completion(order[0])
        for pos in range(1, len(order)):
            ect = sm.earliest_completion(order[pos])
            if ect < jp_ect:
                jp_pos, jp_ect = pos, ect
        jp = order[jp_pos]
        conflicts = sm.inst.conflicts
        for pos, j in enumerate(order):
            if (j == jp or conflicts[j, jp]) and sm.earliest_start(j) < jp_ect:
                return pos
        # Only reachable when p_{j'} = 0 leaves the eligible set empty.
        return jp_pos

    raise ValueError(f"unknown decoder variant {variant!r}; expected one of {VARIANTS}")


def decode(inst: Instance, perm, variant: str = ND) -> tuple[Schedule, int]:
    """Decode a permutation into a feasible schedule and its total flow time."""
    order = _as_perm(inst, perm)
    if variant not in VARIANTS:
        raise ValueError(f"unknown decoder variant {variant!r}; expected one of {VARIANTS}")
    sm = StartMatrix(inst)
    machine_of = np.zeros(inst.n, dtype=np.int64)
    start_of = np.zeros(inst.n, dtype=np.int64)
    total = 0
    while order:
        j = order.pop(_select(variant, order, sm))
        machine, s, c = sm.place(j)
        machine_of[j] = machine
        start_of[j] = s
        total += c
    return Schedule(machine_of=machine_of, start_of=start_of), total


def decode_value(inst: Instance, perm, variant: str = ND) -> int:
    """Total flow time only, via the compiled kernel; no Schedule materialized."""
    if isinstance(perm, Chromosome):
        perm = perm.perm
    parr = np.asarray(perm, dtype=np.int64)
    scratch_m = np.empty(inst.n, dtype=np.int64)
    scratch_s = np.empty(inst.n, dtype=np.int64)
    return int(
        _kernels.decode_kernel(
            inst.proc, inst.conflicts, inst.m, parr, _VARIANT_CODES[variant], scratch_m, scratch_s
        )
    )


def _running_at(inst: Instance, sched: Schedule, t: int) -> list[int]:
    return [
        j
        for j in range(inst.n)
        if inst.proc[j] > 0 and sched.start_of[j] <= t < sched.start_of[j] + inst.proc[j]
    ]


def _fits_at(inst: Instance, sched: Schedule, j: int, machine: int, t: int) -> bool:
    """Could job j run at (machine, t) with every other job fixed?"""
    p = inst.proc
    end = t + int(p[j])
    for q in range(inst.n):
        if q == j or p[q] == 0:
            continue
        if sched.machine_of[q] == machine or inst.conflicts[j, q]:
            if sched.start_of[q] < end and t < sched.start_of[q] + p[q]:
                return False
    return True


def is_nondelay(inst: Instance, sched: Schedule) -> bool:
    """Post-hoc scan for the non-delay property.

    At every integer time before the makespan with an idle machine, each
    not-yet-started job must conflict with some job running at that time.
    The running/started status is piecewise constant between starts and
    completions, so scanning event times covers every integer instant.
    """
    p = inst.proc
    starts = sched.start_of
    comps = starts + p
    makespan = int(comps[p > 0].max(initial=0))
    events = sorted({0, *[int(t) for t in starts], *[int(t) for t in comps]})
    for t in events:
        if t >= makespan:
            continue
        busy_machines = {int(sched.machine_of[j]) for j in _running_at(inst, sched, t)}
        if len(busy_machines) >= inst.m:
            continue
        running = _running_at(inst, sched, t)
        for j in range(inst.n):
            if p[j] == 0 or starts[j] <= t:
                continue
            if not any(inst.conflicts[j, r] for r in running):
                return False
    return True


def is_active(inst: Instance, sched: Schedule) -> bool:
    """Post-hoc single-job left-shift scan for the active-schedule property.

    A schedule is active when no job can be moved to an earlier start on any
    machine while all other jobs stay fixed. If a job fits at some earlier
    start, it also fits when slid left to 0 or to another job's completion,
    so only those candidate starts need testing.
    """
    p = inst.proc
    comps = sched.start_of + p
    for j in range(inst.n):
        if p[j] == 0:
            continue
        cands = {0, *[int(c) for q, c in enumerate(comps) if q != j and p[q] > 0]}
        for t in sorted(cands):
            if t >= sched.start_of[j]:
                break
            for machine in range(inst.m):
                if _fits_at(inst, sched, j, machine, t):
                    return False
    return True

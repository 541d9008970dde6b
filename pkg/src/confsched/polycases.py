"""Exact polynomial-time solvers for structured conflict graphs.

Recognized structures, checked in this fixed order:

1. edgeless conflict graph: plain SPT list scheduling is optimal;
2. clique: all jobs pairwise conflict, so they run sequentially in SPT order;
3. complement of a star: the center conflicts with nobody while the leaves
   pairwise conflict; center at time 0 on one machine, leaves sequentially
   in SPT order on another (needs m >= 2);
4. two machines with unit jobs: a maximum matching in the agreement graph
   pairs up jobs to run in parallel; the optimum equals
   |M|(|M| - n) + n(n+1)/2.

A related routing note: with three machines, unit jobs, and a conflict graph
that is the complement of a bipartite graph, no three jobs can ever run in
parallel, so the instance solves as the two-machine unit case on the same
graph (route it through solve_p2_unit with m = 2).
"""

from __future__ import annotations

import numpy as np

from .bounds import lb_spt, sequential_spt
from .core import Instance, Schedule
from .graphs import agreement_graph, max_matching

EDGELESS = "edgeless"
CLIQUE = "clique"
COMPLEMENT_OF_STAR = "complement_of_star"
TWO_MACHINE_UNIT = "two_machine_unit"
GENERAL = "general"


class StructureMismatchError(ValueError):
    """A specialized solver was called on an instance without its structure."""


def _is_edgeless(inst: Instance) -> bool:
    return not inst.conflicts.any()


def _is_clique(inst: Instance) -> bool:
    n = inst.n
    return bool(np.all(inst.conflicts | np.eye(n, dtype=bool)))


def _star_center(inst: Instance) -> int | None:
    """Center job if the conflict graph is the complement of a star, else None.

    That shape is one isolated vertex plus a clique on the remaining n - 1,
    and makes sense only with n >= 2 and m >= 2.
    """
    if inst.n < 2 or inst.m < 2:
        return None
    degrees = inst.conflict_degrees()
    centers = np.flatnonzero(degrees == 0)
    if centers.size != 1:
        return None
    center = int(centers[0])
    leaves = [j for j in range(inst.n) if j != center]
    for idx, j in enumerate(leaves):
        for k in leaves[idx + 1 :]:
            if not inst.conflicts[j, k]:
                return None
    return center


def _is_two_machine_unit(inst: Instance) -> bool:
    return inst.m == 2 and bool(np.all(inst.proc == 1))


def detect_structure(inst: Instance) -> str:
    """First matching structure label, in the documented precedence order."""
    if _is_edgeless(inst):
        return EDGELESS
    if _is_clique(inst):
        return CLIQUE
    if _star_center(inst) is not None:
        return COMPLEMENT_OF_STAR
    if _is_two_machine_unit(inst):
        return TWO_MACHINE_UNIT
    return GENERAL


def _spt_order(proc) -> list[int]:
    # Non-decreasing processing time, ties by job index.
    return sorted(range(len(proc)), key=lambda j: (int(proc[j]), j))


def solve_edgeless(inst: Instance) -> tuple[Schedule, int]:
    """SPT list scheduling; optimal when no conflicts exist."""
    if not _is_edgeless(inst):
        raise StructureMismatchError("conflict graph is not edgeless")
    machine_of = np.zeros(inst.n, dtype=np.int64)
    start_of = np.zeros(inst.n, dtype=np.int64)
    load = [0] * inst.m
    for j in _spt_order(inst.proc):
        machine = min(range(inst.m), key=lambda i: (load[i], i))
        machine_of[j] = machine
        start_of[j] = load[machine]
        load[machine] += int(inst.proc[j])
    value = int(np.sum(start_of + inst.proc))
    assert value == lb_spt(inst)
    return Schedule(machine_of=machine_of, start_of=start_of), value


def solve_clique(inst: Instance) -> tuple[Schedule, int]:
    """Sequential SPT on one machine; optimal when all jobs pairwise conflict."""
    if not _is_clique(inst):
        raise StructureMismatchError("conflict graph is not a clique")
    machine_of = np.zeros(inst.n, dtype=np.int64)
    start_of = np.zeros(inst.n, dtype=np.int64)
    t = 0
    for j in _spt_order(inst.proc):
        start_of[j] = t
        t += int(inst.proc[j])
    value = int(np.sum(start_of + inst.proc))
    assert value == sequential_spt(inst.proc)
    return Schedule(machine_of=machine_of, start_of=start_of), value


def solve_star_complement(inst: Instance) -> tuple[Schedule, int]:
    """Center at time 0 on machine 0, leaves sequentially (SPT) on machine 1."""
    center = _star_center(inst)
    if center is None:
        raise StructureMismatchError("conflict graph is not the complement of a star")
    machine_of = np.zeros(inst.n, dtype=np.int64)
    start_of = np.zeros(inst.n, dtype=np.int64)
    machine_of[center] = 0
    t = 0
    for j in _spt_order(inst.proc):
        if j == center:
            continue
        machine_of[j] = 1
        start_of[j] = t
        t += int(inst.proc[j])
    value = int(np.sum(start_of + inst.proc))
    return Schedule(machine_of=machine_of, start_of=start_of), value


def p2_unit_closed_form(n: int, matching_size: int) -> int:
    return matching_size * (matching_size - n) + n * (n + 1) // 2


def solve_p2_unit(inst: Instance) -> tuple[Schedule, int]:
    """Two machines, unit jobs: matched pairs in parallel, the rest sequential.

    The schedule value is cross-checked against the closed form
    |M|(|M| - n) + n(n+1)/2 on every call.
    """
    if not _is_two_machine_unit(inst):
        raise StructureMismatchError("requires m = 2 and all unit processing times")
    matching = sorted(max_matching(agreement_graph(inst)))
    machine_of = np.zeros(inst.n, dtype=np.int64)
    start_of = np.zeros(inst.n, dtype=np.int64)
    t = 0
    matched = set()
    for u, v in matching:
        machine_of[u], machine_of[v] = 0, 1
        start_of[u] = start_of[v] = t
        matched.update((u, v))
        t += 1
    for j in range(inst.n):
        if j not in matched:
            start_of[j] = t
            t += 1
    value = int(np.sum(start_of + inst.proc))
    expected = p2_unit_closed_form(inst.n, len(matching))
    if value != expected:
        raise RuntimeError(
            f"matching schedule value {value} disagrees with closed form {expected}"
        )
    return Schedule(machine_of=machine_of, start_of=start_of), value


_SOLVERS = {
    EDGELESS: solve_edgeless,
    CLIQUE: solve_clique,
    COMPLEMENT_OF_STAR: solve_star_complement,
    TWO_MACHINE_UNIT: solve_p2_unit,
}


def solve_special(inst: Instance) -> tuple[str, Schedule, int] | None:
    """Route to the matching exact solver, or None for general instances."""
    structure = detect_structure(inst)
    if structure == GENERAL:
        return None
    sched, value = _SOLVERS[structure](inst)
    return structure, sched, value

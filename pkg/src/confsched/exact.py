"""Desk-scale exact optima via two independent oracles.

`exact_gt_enum` enumerates every job permutation and decodes each with both
the Giffler-Thompson builder and the first-in-first-out builder, keeping the
minimum. The FIFO arm is what makes the enumeration complete: running list
scheduling in the start order of an optimal schedule yields a schedule at
least as good, so the minimum over all permutations is the true optimum.
The GT arm alone can miss optima when the binding constraint is machine
competition between non-conflicting jobs, which its conflict-set rule never
sees; `gt_only_minimum` exposes that restricted value for diagnostics.

`exact_time_indexed` searches machine assignments and integer start times
directly, sharing nothing with the decoder mechanism. Agreement between the
two oracles on the same instance is the package's strongest correctness
check: any discrepancy is a bug, never an accepted outcome.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .bounds import lb_spt, sequential_spt
from .core import Instance, Schedule
from .decoders import FIFO, GT, decode
from .graphs import SizeGuardError

GT_ENUM_MAX_JOBS = 9
TIME_INDEXED_MAX_JOBS = 5
TIME_INDEXED_MAX_HORIZON = 20

_VARIANT_BY_CODE = {_kernels.VAR_GT: GT, _kernels.VAR_FIFO: FIFO}


def exact_gt_enum(inst: Instance) -> tuple[Schedule, int]:
    """Exact optimum by active-schedule enumeration over all n! permutations.

    Each permutation is decoded with the GT and FIFO builders; the kernel
    prunes decodes whose partial cost already proves they cannot beat the
    incumbent, which leaves the minimum unchanged. Returns a witness
    schedule re-decoded through the pure-Python path.
    """
    if inst.n > GT_ENUM_MAX_JOBS:
        raise SizeGuardError(
            f"exact_gt_enum enumerates n! permutations; limited to "
            f"{GT_ENUM_MAX_JOBS} jobs, got {inst.n}"
        )
    best, best_perm, variant_code = _kernels.active_enum_kernel(inst.proc, inst.conflicts, inst.m)
    sched, value = decode(inst, [int(j) for j in best_perm], _VARIANT_BY_CODE[int(variant_code)])
    if value != int(best):
        raise RuntimeError("kernel and reference decoders disagree on the witness permutation")
    return sched, value


def gt_only_minimum(inst: Instance) -> int:
    """Minimum of the GT decode alone over all permutations.

    Strictly above the optimum on some instances (see module docstring);
    kept for diagnosing how much the GT builder's restriction costs.
    """
    if inst.n > GT_ENUM_MAX_JOBS:
        raise SizeGuardError(f"limited to {GT_ENUM_MAX_JOBS} jobs, got {inst.n}")
    return int(_kernels.variant_enum_kernel(inst.proc, inst.conflicts, inst.m, _kernels.VAR_GT))


def exact_time_indexed(inst: Instance, horizon: int) -> int:
    """Exhaustive minimum over machine assignments and starts in [0, horizon - p_j].

    Independent of the decoders. Prunes on cost only: partial cost plus an
    SPT relaxation of the unplaced jobs, against a feasible incumbent seeded
    by the one-machine sequential schedule. Machines are identical, so
    assignments are canonicalized (a job may only open the next fresh
    machine), which preserves the minimum.
    """
    if inst.n > TIME_INDEXED_MAX_JOBS or horizon > TIME_INDEXED_MAX_HORIZON:
        raise SizeGuardError(
            f"exact_time_indexed limited to {TIME_INDEXED_MAX_JOBS} jobs and "
            f"horizon {TIME_INDEXED_MAX_HORIZON}, got n={inst.n}, horizon={horizon}"
        )
    p_all = inst.proc
    if horizon < int(p_all.max(initial=0)):
        raise ValueError(f"horizon {horizon} cannot fit the longest job")

    n, m = inst.n, inst.m
    order = sorted(range(n), key=lambda j: (-int(p_all[j]), j))  # big jobs first prune harder
    p = [int(p_all[j]) for j in order]
    conf = inst.conflicts[np.ix_(order, order)]

    # suffix_bound[k]: SPT relaxation of the jobs still unplaced after depth k.
    suffix_bound = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        sub = Instance(
            m=m, proc=np.array(p[k:], dtype=np.int64), conflicts=np.zeros((n - k, n - k), bool)
        )
        suffix_bound[k] = lb_spt(sub)

    best = sequential_spt(p_all) if int(p_all.sum()) <= horizon else None
    starts = [0] * n
    machs = [0] * n

    def dfs(k: int, used_machines: int, cost: int) -> None:
        nonlocal best
        if k == n:
            if best is None or cost < best:
                best = cost
            return
        pk = p[k]
        for machine in range(min(used_machines + 1, m)):
            for t in range(horizon - pk + 1):
                if best is not None and cost + t + pk + suffix_bound[k + 1] >= best:
                    break  # the bound only grows with t
                ok = True
                if pk > 0:
                    for q in range(k):
                        if p[q] == 0:
                            continue
                        if machs[q] == machine or conf[k, q]:
                            if starts[q] < t + pk and t < starts[q] + p[q]:
                                ok = False
                                break
                if ok:
                    starts[k], machs[k] = t, machine
                    dfs(k + 1, max(used_machines, machine + 1), cost + t + pk)

    dfs(0, 0, 0)
    if best is None:
        raise ValueError(f"no feasible schedule fits horizon {horizon}")
    return best


def oracle_value(inst: Instance) -> int:
    """Exact optimum via the enumeration oracle (the roomier of the two guards)."""
    return exact_gt_enum(inst)[1]


def brute_min_over_permutations(inst: Instance, variant: str) -> int:
    """Minimum of the pure-Python decoder over all permutations.

    Separate route from the kernels (no compilation, no pruning); used to
    cross-check the compiled enumeration.
    """
    import itertools

    if inst.n > 8:
        raise SizeGuardError(f"pure-Python enumeration limited to 8 jobs, got {inst.n}")
    best = None
    for perm in itertools.permutations(range(inst.n)):
        _, value = decode(inst, list(perm), variant)
        if best is None or value < best:
            best = value
    return best


def verify_oracles_agree(inst: Instance) -> int:
    """Run both oracles and fail loudly unless they coincide."""
    horizon = int(inst.proc.sum())
    enum_value = exact_gt_enum(inst)[1]
    ti_value = exact_time_indexed(inst, horizon)
    if enum_value != ti_value:
        raise RuntimeError(
            f"oracle disagreement on {inst.id or 'instance'}: "
            f"enumeration={enum_value}, time_indexed={ti_value}"
        )
    return enum_value

"""Compiled hot paths: schedule decoding and exhaustive permutation search.

These kernels mirror the pure-Python decoders exactly (same variant rules,
same tie-breaks); the test suite asserts bit-equal results between both
paths. The earliest-start matrix is carried as a per-machine release array
plus a per-job conflict release array, see decoders.StartMatrix.
"""

from __future__ import annotations

import numba as nb
import numpy as np

VAR_FIFO = 0
VAR_GT = 1
VAR_ECTF = 2
VAR_ND = 3

_BIG = np.int64(2**62)


@nb.njit(cache=True)
def decode_kernel(proc, adj, m, perm, variant, machines_out, starts_out):
    """Decode `perm` under the given variant; fills machine/start arrays.

    Returns the total flow time.
    """
    n = proc.shape[0]
    mach_rel = np.zeros(m, dtype=np.int64)
    conf_rel = np.zeros(n, dtype=np.int64)
    used = np.zeros(n, dtype=np.bool_)
    total = np.int64(0)

    for _ in range(n):
        m_min = mach_rel[0]
        for i in range(1, m):
            if mach_rel[i] < m_min:
                m_min = mach_rel[i]

        sel = -1
        if variant == VAR_FIFO:
            for idx in range(n):
                j = perm[idx]
                if not used[j]:
                    sel = j
                    break
        elif variant == VAR_ECTF:
            best = _BIG
            for idx in range(n):
                j = perm[idx]
                if used[j]:
                    continue
                s = conf_rel[j] if conf_rel[j] > m_min else m_min
                ect = s + proc[j]
                if ect < best:
                    best = ect
                    sel = j
        elif variant == VAR_ND:
            best = _BIG
            for idx in range(n):
                j = perm[idx]
                if used[j]:
                    continue
                s = conf_rel[j] if conf_rel[j] > m_min else m_min
                if s < best:
                    best = s
                    sel = j
        else:  # VAR_GT
            jp = -1
            jp_ect = _BIG
            for idx in range(n):
                j = perm[idx]
                if used[j]:
                    continue
                s = conf_rel[j] if conf_rel[j] > m_min else m_min
                ect = s + proc[j]
                if ect < jp_ect:
                    jp_ect = ect
                    jp = j
            for idx in range(n):
                j = perm[idx]
                if used[j]:
                    continue
                if j == jp or adj[j, jp]:
                    s = conf_rel[j] if conf_rel[j] > m_min else m_min
                    if s < jp_ect:
                        sel = j
                        break
            if sel == -1:  # p_{j'} = 0 corner: eligible set empty
                sel = jp

        s = conf_rel[sel] if conf_rel[sel] > m_min else m_min
        machine = 0
        for i in range(m):
            if mach_rel[i] <= s:
                machine = i
                break
        c = s + proc[sel]
        mach_rel[machine] = c
        used[sel] = True
        machines_out[sel] = machine
        starts_out[sel] = s
        total += c
        for j in range(n):
            if not used[j] and adj[sel, j] and conf_rel[j] < c:
                conf_rel[j] = c

    return total


@nb.njit(cache=True)
def decode_bounded(proc, adj, m, perm, variant, limit):
    """FIFO or GT decode with early abort: returns `limit` as soon as the
    partial total plus a per-job earliest-completion bound proves the
    permutation cannot beat it. Start levels only grow, so the bound is
    admissible."""
    n = proc.shape[0]
    mach_rel = np.zeros(m, dtype=np.int64)
    conf_rel = np.zeros(n, dtype=np.int64)
    used = np.zeros(n, dtype=np.bool_)
    total = np.int64(0)

    for step in range(n):
        m_min = mach_rel[0]
        for i in range(1, m):
            if mach_rel[i] < m_min:
                m_min = mach_rel[i]

        sel = -1
        if variant == VAR_FIFO:
            for idx in range(n):
                j = perm[idx]
                if not used[j]:
                    sel = j
                    break
        else:  # VAR_GT
            jp = -1
            jp_ect = _BIG
            for idx in range(n):
                j = perm[idx]
                if used[j]:
                    continue
                s = conf_rel[j] if conf_rel[j] > m_min else m_min
                ect = s + proc[j]
                if ect < jp_ect:
                    jp_ect = ect
                    jp = j
            for idx in range(n):
                j = perm[idx]
                if used[j]:
                    continue
                if j == jp or adj[j, jp]:
                    s = conf_rel[j] if conf_rel[j] > m_min else m_min
                    if s < jp_ect:
                        sel = j
                        break
            if sel == -1:
                sel = jp

        s = conf_rel[sel] if conf_rel[sel] > m_min else m_min
        machine = 0
        for i in range(m):
            if mach_rel[i] <= s:
                machine = i
                break
        c = s + proc[sel]
        mach_rel[machine] = c
        used[sel] = True
        total += c
        for j in range(n):
            if not used[j] and adj[sel, j] and conf_rel[j] < c:
                conf_rel[j] = c

        if step + 1 < n:
            m_min = mach_rel[0]
            for i in range(1, m):
                if mach_rel[i] < m_min:
                    m_min = mach_rel[i]
            bound = total
            for j in range(n):
                if not used[j]:
                    s = conf_rel[j] if conf_rel[j] > m_min else m_min
                    bound += s + proc[j]
            if bound >= limit:
                return limit

    return total


@nb.njit(cache=True)
def _next_permutation(perm):
    """In-place lexicographic successor; False once the last one is reached."""
    n = perm.shape[0]
    i = n - 2
    while i >= 0 and perm[i] >= perm[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = n - 1
    while perm[j] <= perm[i]:
        j -= 1
    perm[i], perm[j] = perm[j], perm[i]
    lo = i + 1
    hi = n - 1
    while lo < hi:
        perm[lo], perm[hi] = perm[hi], perm[lo]
        lo += 1
        hi -= 1
    return True


@nb.njit(cache=True)
def active_enum_kernel(proc, adj, m):
    """Minimum over all n! permutations of min(GT decode, FIFO decode).

    The FIFO arm makes the enumeration complete: list scheduling in the
    start order of any optimal schedule reproduces a schedule at least as
    good, so the minimum here is the exact optimum. The GT arm alone can
    miss optima whose bottleneck is machine competition between
    non-conflicting jobs. Returns (best value, argmin permutation, variant
    code of the winning decode).
    """
    n = proc.shape[0]
    perm = np.arange(n)
    best = _BIG
    best_perm = perm.copy()
    best_variant = VAR_GT
    while True:
        total = decode_bounded(proc, adj, m, perm, VAR_GT, best)
        if total < best:
            best = total
            best_perm[:] = perm
            best_variant = VAR_GT
        total = decode_bounded(proc, adj, m, perm, VAR_FIFO, best)
        if total < best:
            best = total
            best_perm[:] = perm
            best_variant = VAR_FIFO
        if not _next_permutation(perm):
            break
    return best, best_perm, best_variant


@nb.njit(cache=True)
def variant_enum_kernel(proc, adj, m, variant):
    """Minimum of one decoder variant over all n! permutations (no pruning
    shortcuts besides the per-decode abort)."""
    n = proc.shape[0]
    perm = np.arange(n)
    best = _BIG
    while True:
        if variant == VAR_FIFO or variant == VAR_GT:
            total = decode_bounded(proc, adj, m, perm, variant, best)
        else:
            machines = np.empty(n, dtype=np.int64)
            starts = np.empty(n, dtype=np.int64)
            total = decode_kernel(proc, adj, m, perm, variant, machines, starts)
        if total < best:
            best = total
        if not _next_permutation(perm):
            break
    return best

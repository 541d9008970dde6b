"""Agreement-graph construction, maximum matching, and greedy weighted independent sets.

The agreement graph is the complement of the conflict graph with vertex
weights equal to processing times. A set of pairwise-conflicting jobs is an
independent set there, which is what the independent-set lower bounds need.

The greedy rules follow the classic GWMIN / GWMIN2 / GWMAX family:

* GWMIN   selects v maximizing w(v) / (deg(v) + 1), keeps v, deletes N[v];
* GWMIN2  selects v maximizing w(v) / sum of w over N[v], same deletion;
* GWMAX   repeatedly deletes (never selects) a vertex of positive degree
  minimizing w(v) / (deg(v) * (deg(v) + 1)) until no edges remain, then
  returns the survivors.

Scores are compared as exact fractions; ties break on the lowest vertex
index, so every rule is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import networkx as nx
import numpy as np

from .core import Instance

GWMIN = "gwmin"
GWMIN2 = "gwmin2"
GWMAX = "gwmax"
WIS_RULES = (GWMIN, GWMIN2, GWMAX)

BRUTE_MWIS_MAX_VERTICES = 24
BRUTE_MATCHING_MAX_VERTICES = 12


class SizeGuardError(ValueError):
    """Exhaustive routine refused: input exceeds its size guard."""


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Symmetric irreflexive adjacency plus non-negative integer vertex weights."""

    adj: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adj, dtype=bool)
        w = np.asarray(self.weights, dtype=np.int64)
        object.__setattr__(self, "adj", adj)
        object.__setattr__(self, "weights", w)
        n = adj.shape[0]
        if adj.shape != (n, n) or not np.array_equal(adj, adj.T) or np.any(np.diag(adj)):
            raise ValueError("adjacency must be square, symmetric, irreflexive")
        if w.shape != (n,) or np.any(w < 0):
            raise ValueError("weights must be a non-negative vector matching the vertex count")

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    def edges(self) -> list[tuple[int, int]]:
        ju, ku = np.triu_indices(self.n, 1)
        mask = self.adj[ju, ku]
        return list(zip(ju[mask].tolist(), ku[mask].tolist()))


def agreement_graph(inst: Instance) -> WeightedGraph:
    """Complement of the conflict graph, weighted by processing times."""
    n = inst.n
    adj = ~inst.conflicts & ~np.eye(n, dtype=bool)
    return WeightedGraph(adj=adj, weights=inst.proc.copy())


def max_matching(g: WeightedGraph) -> set[tuple[int, int]]:
    """Maximum-cardinality matching on a general graph (blossom-based).

    Vertex weights are ignored; only the number of disjoint edges matters.
    Returns edges as (u, v) with u < v.
    """
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges())
    mate = nx.max_weight_matching(G, maxcardinality=True)
    return {(min(u, v), max(u, v)) for u, v in mate}


def brute_max_matching_size(g: WeightedGraph) -> int:
    """Exhaustive maximum matching cardinality; oracle for small graphs."""
    if g.n > BRUTE_MATCHING_MAX_VERTICES:
        raise SizeGuardError(
            f"brute matching limited to {BRUTE_MATCHING_MAX_VERTICES} vertices, got {g.n}"
        )
    nbr_masks = tuple(int(sum(1 << k for k in np.flatnonzero(g.adj[v]))) for v in range(g.n))
    n = g.n

    @lru_cache(maxsize=None)
    def best(avail: int) -> int:
        if avail == 0:
            return 0
        v = (avail & -avail).bit_length() - 1
        rest = avail & ~(1 << v)
        out = best(rest)  # v stays unmatched
        cand = nbr_masks[v] & rest
        while cand:
            u = (cand & -cand).bit_length() - 1
            cand &= cand - 1
            out = max(out, 1 + best(rest & ~(1 << u)))
        return out

    result = best((1 << n) - 1)
    best.cache_clear()
    return result


def _greedy_select(g: WeightedGraph, score_fn) -> list[int]:
    # Shared loop for GWMIN/GWMIN2: pick argmax score, keep it, delete N[v].
    alive = np.ones(g.n, dtype=bool)
    chosen: list[int] = []
    while alive.any():
        best_v, best_score = -1, None
        for v in np.flatnonzero(alive):
            s = score_fn(int(v), alive)
            if best_score is None or s > best_score:
                best_v, best_score = int(v), s
        chosen.append(best_v)
        alive[best_v] = False
        alive[g.adj[best_v] & alive] = False
    return sorted(chosen)


def greedy_wis(g: WeightedGraph, rule: str) -> list[int]:
    """Greedy independent set under one of the GWMIN/GWMIN2/GWMAX rules."""
    w = g.weights

    if rule == GWMIN:

        def score(v, alive):
            deg = int(np.count_nonzero(g.adj[v] & alive))
            return Fraction(int(w[v]), deg + 1)

        return _greedy_select(g, score)

    if rule == GWMIN2:

        def score(v, alive):
            closed = int(w[g.adj[v] & alive].sum()) + int(w[v])
            if closed == 0:
                return Fraction(0)
            return Fraction(int(w[v]), closed)

        return _greedy_select(g, score)

    if rule == GWMAX:
        alive = np.ones(g.n, dtype=bool)
        deg = g.adj.sum(axis=1).astype(np.int64)
        while True:
            cands = np.flatnonzero(alive & (deg >= 1))
            if cands.size == 0:
                return sorted(int(v) for v in np.flatnonzero(alive))
            worst_v, worst_score = -1, None
            for v in cands:
                d = int(deg[v])
                s = Fraction(int(w[v]), d * (d + 1))
                if worst_score is None or s < worst_score:
                    worst_v, worst_score = int(v), s
            alive[worst_v] = False
            deg[g.adj[worst_v] & alive] -= 1

    raise ValueError(f"unknown rule {rule!r}; expected one of {WIS_RULES}")


def is_independent_set(g: WeightedGraph, vertices) -> bool:
    vs = list(vertices)
    return not any(g.adj[u, v] for i, u in enumerate(vs) for v in vs[i + 1 :])


def set_weight(g: WeightedGraph, vertices) -> int:
    return int(g.weights[list(vertices)].sum()) if len(list(vertices)) else 0


def brute_mwis(g: WeightedGraph) -> list[int]:
    """Exhaustive maximum-weight independent set; guarded to 24 vertices."""
    if g.n > BRUTE_MWIS_MAX_VERTICES:
        raise SizeGuardError(f"brute MWIS limited to {BRUTE_MWIS_MAX_VERTICES} vertices, got {g.n}")
    n = g.n
    w = [int(x) for x in g.weights]
    closed_masks = tuple(
        int(sum(1 << k for k in np.flatnonzero(g.adj[v]))) | (1 << v) for v in range(n)
    )

    @lru_cache(maxsize=None)
    def best(avail: int) -> tuple[int, int]:
        # Returns (weight, chosen-mask); prefers the lexicographically
        # smallest vertex set on weight ties for determinism.
        if avail == 0:
            return 0, 0
        v = (avail & -avail).bit_length() - 1
        w_in, set_in = best(avail & ~closed_masks[v])
        w_in += w[v]
        set_in |= 1 << v
        w_out, set_out = best(avail & ~(1 << v))
        if w_in >= w_out:
            return w_in, set_in
        return w_out, set_out

    _, mask = best((1 << n) - 1)
    best.cache_clear()
    return [v for v in range(n) if mask >> v & 1]

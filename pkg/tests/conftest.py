import random

import numpy as np
import pytest

from confsched.core import Instance


def make_instance(m, proc, edges=(), id=None):
    n = len(proc)
    conf = np.zeros((n, n), dtype=bool)
    for a, b in edges:
        conf[a, b] = conf[b, a] = True
    return Instance(m=m, proc=np.array(proc, dtype=np.int64), conflicts=conf, id=id)


def random_instance(rng: random.Random, n=None, m=None, density=None, p_max=10, p_min=1):
    n = n if n is not None else rng.randint(2, 8)
    m = m if m is not None else rng.randint(1, 3)
    density = density if density is not None else rng.choice([0.2, 0.5, 0.8])
    proc = [rng.randint(p_min, p_max) for _ in range(n)]
    edges = [
        (j, k) for j in range(n) for k in range(j + 1, n) if rng.random() < density
    ]
    return make_instance(m, proc, edges)


def hp_reduction_instance(n_path: int, a: int, b: int) -> Instance:
    """Two-machine instance from a Hamiltonian path graph: agreement graph is
    the path plus a universal short job; conflict graph is its complement."""
    nn = n_path + 1
    agree = np.zeros((nn, nn), dtype=bool)
    for v in range(n_path - 1):
        agree[v, v + 1] = agree[v + 1, v] = True
    agree[:, n_path] = True
    agree[n_path, :] = True
    np.fill_diagonal(agree, False)
    conf = ~agree & ~np.eye(nn, dtype=bool)
    proc = np.array([b] * n_path + [a], dtype=np.int64)
    return Instance(m=2, proc=proc, conflicts=conf, id=f"hp-n{n_path}-a{a}-b{b}")


def pit_reduction_instance(q: int) -> Instance:
    """Three-machine unit-time instance whose agreement graph is q disjoint
    triangles; the triangle partition is the only way to finish by time q."""
    n = 3 * q
    agree = np.zeros((n, n), dtype=bool)
    for base in range(0, n, 3):
        for x in range(base, base + 3):
            for y in range(x + 1, base + 3):
                agree[x, y] = agree[y, x] = True
    conf = ~agree & ~np.eye(n, dtype=bool)
    return Instance(m=3, proc=np.ones(n, dtype=np.int64), conflicts=conf, id=f"pit-q{q}")


@pytest.fixture
def e1():
    """Three jobs, two machines, one conflict pair; optimum 7."""
    return make_instance(2, [2, 1, 3], [(0, 1)], id="E1")


@pytest.fixture
def u1():
    """Four unit jobs, two machines, two conflict pairs; optimum 6."""
    return make_instance(2, [1, 1, 1, 1], [(0, 1), (2, 3)], id="U1")

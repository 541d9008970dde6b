"""Benchmark instance generation and the plain-text instance file format.

Six processing-time classes are crossed with Erdos-Renyi G(n, p) conflict
graphs. Processing times are discrete uniform on a closed integer range:

    class 1: [1, 10]    class 2: [1, 100]   class 3: [10, 20]
    class 4: [90, 100]  class 5: [90, 100]  class 6: [10, 100]

Classes 4 and 5 share a distribution but stay distinct ids for provenance.

Generation is driven by numpy's MT19937 through RandomState, seeded via
SeedSequence, because that stream is frozen by numpy's compatibility
guarantee: the same 64-bit seed yields the same instance on any platform.
Call order is fixed: one randint draw for the processing times, then one
random_sample draw for the upper-triangle edge coin flips (lexicographic
pair order).

File format (1-based job labels, '#' lines are comments)::

    # id: <label>
    n m
    p_1 p_2 ... p_n
    j k          <- one conflict edge per line

Files ending in .gz are gzip-compressed transparently.
"""

from __future__ import annotations

import gzip
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
from numpy.random import MT19937, RandomState, SeedSequence

from .core import Instance, StructuralError

PROC_RANGES = {1: (1, 10), 2: (1, 100), 3: (10, 20), 4: (90, 100), 5: (90, 100), 6: (10, 100)}

GRID_N = (20, 50, 100, 150)
GRID_M = (3, 5, 8, 10, 12)
GRID_CLASSES = (1, 2, 3, 4, 5, 6)
GRID_DENSITIES = (0.2, 0.5, 0.8)
GRID_INSTANCES_PER_CELL = 20
GRID_GRAPHS_PER_DENSITY = 5


class InstanceFormatError(ValueError):
    """Malformed instance file; message names the offending line."""


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one generated instance."""

    n: int
    m: int
    class_id: int
    density: float
    seed: int

    def __post_init__(self):
        if self.class_id not in PROC_RANGES:
            raise ValueError(f"class_id must be in 1..6, got {self.class_id}")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError(f"density must be in [0, 1], got {self.density}")
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")


def _rng(seed) -> RandomState:
    return RandomState(MT19937(SeedSequence(seed)))


def _sample_proc(rs: RandomState, n: int, class_id: int) -> np.ndarray:
    lo, hi = PROC_RANGES[class_id]
    return rs.randint(lo, hi + 1, size=n).astype(np.int64)


def _sample_conflicts(rs: RandomState, n: int, density: float) -> np.ndarray:
    conf = np.zeros((n, n), dtype=bool)
    ju, ku = np.triu_indices(n, 1)
    if ju.size:
        hit = rs.random_sample(ju.size) < density
        conf[ju[hit], ku[hit]] = True
        conf |= conf.T
    return conf


def generate(spec: GenSpec) -> Instance:
    """Generate the instance determined by `spec`; pure function of the seed."""
    rs = _rng(spec.seed)
    proc = _sample_proc(rs, spec.n, spec.class_id)
    conf = _sample_conflicts(rs, spec.n, spec.density)
    label = f"gen-n{spec.n}-m{spec.m}-k{spec.class_id}-p{spec.density:g}-s{spec.seed}"
    return Instance(m=spec.m, proc=proc, conflicts=conf, id=label)


@dataclass(frozen=True)
class GridCoords:
    """Position in the benchmark grid: base instance plus conflict-graph replicate."""

    n: int
    m: int
    class_id: int
    rep: int
    density: float
    graph_rep: int


def grid_coords(
    ns: Iterable[int] = GRID_N,
    ms: Iterable[int] = GRID_M,
    classes: Iterable[int] = GRID_CLASSES,
    densities: Iterable[float] = GRID_DENSITIES,
    instances_per_cell: int = GRID_INSTANCES_PER_CELL,
    graphs_per_density: int = GRID_GRAPHS_PER_DENSITY,
) -> Iterator[GridCoords]:
    for n, m, cls, rep, dens, grep in itertools.product(
        ns, ms, classes, range(instances_per_cell), densities, range(graphs_per_density)
    ):
        yield GridCoords(n, m, cls, rep, dens, grep)


def generate_grid_instance(coords: GridCoords, master_seed: int) -> Instance:
    """Grid instance with seeds derived from the grid coordinates.

    The processing-time vector depends only on (n, m, class, rep), so the
    conflict-graph replicates of one base instance share their job sizes,
    mirroring how the benchmark grid attaches several graphs per density to
    each base instance.
    """
    dens_key = round(coords.density * 1000)
    proc_ss = SeedSequence((master_seed, 0, coords.n, coords.m, coords.class_id, coords.rep))
    graph_ss = SeedSequence(
        (master_seed, 1, coords.n, coords.m, coords.class_id, coords.rep, dens_key, coords.graph_rep)
    )
    proc = _sample_proc(RandomState(MT19937(proc_ss)), coords.n, coords.class_id)
    conf = _sample_conflicts(RandomState(MT19937(graph_ss)), coords.n, coords.density)
    label = (
        f"grid-n{coords.n}-m{coords.m}-k{coords.class_id}-i{coords.rep}"
        f"-p{coords.density:g}-g{coords.graph_rep}-s{master_seed}"
    )
    return Instance(m=coords.m, proc=proc, conflicts=conf, id=label)


def _open(path, mode: str):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode + "t", encoding="ascii")
    return open(path, mode, encoding="ascii")


def write_instance(inst: Instance, path) -> None:
    with _open(path, "w") as fh:
        if inst.id is not None:
            fh.write(f"# id: {inst.id}\n")
        fh.write(f"{inst.n} {inst.m}\n")
        fh.write(" ".join(str(int(p)) for p in inst.proc) + "\n")
        for j, k in inst.conflict_pairs():
            fh.write(f"{j + 1} {k + 1}\n")


def read_instance(path) -> Instance:
    """Parse an instance file; raises InstanceFormatError naming the bad line."""
    with _open(path, "r") as fh:
        raw = fh.read().splitlines()

    label = None
    lines: list[tuple[int, str]] = []
    for lineno, text in enumerate(raw, start=1):
        stripped = text.strip()
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.startswith("id:"):
                label = body[3:].strip() or None
            continue
        if stripped:
            lines.append((lineno, stripped))

    if not lines:
        raise InstanceFormatError("empty instance file")

    def ints(lineno: int, text: str, expect: int | None = None) -> list[int]:
        parts = text.split()
        if expect is not None and len(parts) != expect:
            raise InstanceFormatError(f"line {lineno}: expected {expect} fields, got {len(parts)}")
        try:
            return [int(tok) for tok in parts]
        except ValueError as exc:
            raise InstanceFormatError(f"line {lineno}: non-integer field in {text!r}") from exc

    lineno, header = lines[0]
    n, m = ints(lineno, header, expect=2)
    if n < 1:
        raise InstanceFormatError(f"line {lineno}: job count must be >= 1, got {n}")
    if m < 1:
        raise InstanceFormatError(f"line {lineno}: machine count must be >= 1, got {m}")
    if len(lines) < 2:
        raise InstanceFormatError("missing processing-time line")

    lineno, body = lines[1]
    proc = ints(lineno, body, expect=n)
    if any(p < 0 for p in proc):
        raise InstanceFormatError(f"line {lineno}: negative processing time")

    conf = np.zeros((n, n), dtype=bool)
    for lineno, text in lines[2:]:
        j, k = ints(lineno, text, expect=2)
        if not (1 <= j <= n and 1 <= k <= n):
            raise InstanceFormatError(f"line {lineno}: job label out of range 1..{n}")
        if j == k:
            raise InstanceFormatError(f"line {lineno}: self-loop edge ({j}, {k})")
        a, b = j - 1, k - 1
        if conf[a, b]:
            raise InstanceFormatError(f"line {lineno}: duplicate edge ({j}, {k})")
        conf[a, b] = conf[b, a] = True

    try:
        return Instance(m=m, proc=np.array(proc, dtype=np.int64), conflicts=conf, id=label)
    except StructuralError as exc:
        raise InstanceFormatError(str(exc)) from exc

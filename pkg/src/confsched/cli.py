"""Command-line surface: gen / solve / bounds / exact / export / bench.

Exit codes: 0 success, 1 runtime or data error, 2 usage error. Every run is
reproducible from its flags: generation demands an explicit seed, solving
derives all randomness from --seed, and bench derives per-instance GA seeds
from (master seed, instance id). Parallelism (--jobs) only ever spans
instances, never the inside of a GA run.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import exact as exact_mod
from . import ga as ga_mod
from . import instances as inst_mod
from . import milp as milp_mod
from . import polycases
from .core import Instance, metrics
from .graphs import SizeGuardError

CSV_SCHEMA = "confsched-bench-v1"


class UsageError(Exception):
    pass


def _fmt_frac(value) -> str:
    return "NA" if value is None else f"{float(value):.6g}"


def _fmt_pct(value) -> str:
    return "NA" if value is None else f"{100 * float(value):.3f}"


def _parse_density_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise UsageError(f"bad density list {text!r}") from exc


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok]
    except ValueError as exc:
        raise UsageError(f"bad integer list {text!r}") from exc


def cmd_gen(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if args.grid:
        ns = _parse_int_list(args.n) if args.n else list(inst_mod.GRID_N)
        ms = _parse_int_list(args.m) if args.m else list(inst_mod.GRID_M)
        classes = _parse_int_list(args.classes) if args.classes else list(inst_mod.GRID_CLASSES)
        densities = (
            _parse_density_list(args.densities) if args.densities else list(inst_mod.GRID_DENSITIES)
        )
        count = args.count if args.count is not None else inst_mod.GRID_INSTANCES_PER_CELL
        graphs = args.graphs if args.graphs is not None else inst_mod.GRID_GRAPHS_PER_DENSITY
        for coords in inst_mod.grid_coords(ns, ms, classes, densities, count, graphs):
            inst = inst_mod.generate_grid_instance(coords, args.seed)
            path = out_dir / f"{inst.id}.txt"
            inst_mod.write_instance(inst, path)
            written.append((path, inst))
    else:
        if args.n is None or args.m is None:
            raise UsageError("--n and --m are required without --grid")
        n = int(args.n)
        m = int(args.m)
        count = args.count if args.count is not None else 1
        for rep in range(count):
            seed = int(np.random.SeedSequence((args.seed, rep)).generate_state(1)[0])
            spec = inst_mod.GenSpec(
                n=n, m=m, class_id=args.proc_class, density=args.density, seed=seed
            )
            inst = inst_mod.generate(spec)
            path = out_dir / f"{inst.id}.txt"
            inst_mod.write_instance(inst, path)
            written.append((path, inst))
    print(f"# manifest master_seed={args.seed} files={len(written)}")
    for path, inst in written:
        print(f"{path} id={inst.id} n={inst.n} m={inst.m}")
    return 0


def _ga_config_from_args(inst: Instance, args) -> ga_mod.GaConfig:
    density = args.density
    if density is None:
        pairs = inst.n * (inst.n - 1) / 2
        density = len(inst.conflict_pairs()) / pairs if pairs else 0.0
    if args.preset == "paper":
        cfg = ga_mod.paper_preset(inst.n, density, rng_seed=args.seed)
    else:
        cfg = ga_mod.GaConfig(rng_seed=args.seed)
    overrides = {
        "pop_size": args.pop_size,
        "mutation_prob": args.mutation_prob,
        "max_iters": args.max_iters,
        "max_no_improve": args.max_no_improve,
        "max_dup_tries": args.max_dup_tries,
        "decoder_variant": args.decoder,
        "crossover_variant": args.crossover,
        "mutation_variant": args.mutation,
        "seeding": args.seeding,
        "ls_iters": args.ls_iters,
    }
    fields = {k: v for k, v in overrides.items() if v is not None}
    if fields:
        from dataclasses import replace

        cfg = replace(cfg, **fields)
    return cfg


def solve_one(inst: Instance, args) -> dict:
    """Polynomial-case router first; otherwise the GA with the chosen config."""
    t0 = time.perf_counter()
    report = bounds_mod.best_bound(inst)
    special = polycases.solve_special(inst)
    if special is not None:
        structure, _sched, value = special
        rec = {
            "instance": inst.id or "unnamed",
            "value": value,
            "best_lb": max(report.best, 0),
            "method": f"exact-{structure}",
            "stop": "exact_structure",
            "generations": 0,
            "pop": 0,
        }
    else:
        cfg = _ga_config_from_args(inst, args)
        res = ga_mod.run_ga(inst, cfg)
        rec = {
            "instance": inst.id or "unnamed",
            "value": res.value,
            "best_lb": res.stats.best_lb,
            "method": "ga-ls" if cfg.ls_iters else "ga",
            "stop": res.stats.stop_reason,
            "generations": res.stats.iterations,
            "pop": res.stats.final_pop_size,
        }
    lb = rec["best_lb"]
    rec["deviation"] = None if lb <= 0 else (rec["value"] - lb) / lb
    rec["time"] = time.perf_counter() - t0
    return rec


def cmd_solve(args) -> int:
    inst = inst_mod.read_instance(args.instance)
    rec = solve_one(inst, args)
    print(
        f"instance={rec['instance']} method={rec['method']} value={rec['value']} "
        f"best_lb={rec['best_lb']} deviation={_fmt_frac(rec['deviation'])} "
        f"stop={rec['stop']} generations={rec['generations']} "
        f"pop={rec['pop']} time={rec['time']:.3f}s"
    )
    return 0


def cmd_bounds(args) -> int:
    inst = inst_mod.read_instance(args.instance)
    report = bounds_mod.best_bound(inst)
    for name, value in report.values().items():
        marker = " *" if name == report.best_source else ""
        print(f"{name}={value} time={report.wall_times[name]:.6f}s{marker}")
    print(f"best={report.best} source={report.best_source}")
    return 0


def cmd_exact(args) -> int:
    inst = inst_mod.read_instance(args.instance)
    if args.time_indexed:
        horizon = args.horizon if args.horizon is not None else int(inst.proc.sum())
        value = exact_mod.exact_time_indexed(inst, horizon)
        print(f"instance={inst.id or 'unnamed'} optimum={value} oracle=time_indexed")
    else:
        _sched, value = exact_mod.exact_gt_enum(inst)
        print(f"instance={inst.id or 'unnamed'} optimum={value} oracle=enumeration")
    return 0


def cmd_export(args) -> int:
    inst = inst_mod.read_instance(args.instance)
    model = milp_mod.build_model(inst, args.formulation, args.horizon)
    stem = Path(args.out) if args.out else Path(args.instance).with_suffix("")
    lp_path = stem.with_suffix(f".{args.formulation.lower()}.lp")
    start_path = stem.with_suffix(f".{args.formulation.lower()}.start")
    milp_mod.export_lp(model, lp_path)
    assignment = milp_mod.warm_start(inst, args.formulation, args.horizon)
    violations = model.check_assignment(assignment)
    if violations:
        raise RuntimeError(f"warm start violates the exported model: {violations[:3]}")
    milp_mod.write_warm_start(assignment, start_path)
    print(f"wrote {lp_path} ({len(model.variables)} vars, {len(model.constraints)} constraints)")
    print(f"wrote {start_path} (warm-start objective {model.objective_value(assignment)})")
    return 0


def _bench_worker(payload):
    path, methods, master_seed, ls_iters = payload
    inst = inst_mod.read_instance(path)
    # crc32, not hash(): the per-instance seed must survive interpreter restarts
    id_key = zlib.crc32((inst.id or Path(path).stem).encode())
    seed = int(np.random.SeedSequence((master_seed, id_key)).generate_state(1)[0])
    row = {"instance": inst.id or Path(path).stem, "n": inst.n, "m": inst.m}
    row["class"], row["density"] = _id_fields(inst)
    report = bounds_mod.best_bound(inst)
    best_lb = report.best
    best_ub = None
    if "bounds" in methods:
        for name, value in report.values().items():
            row[f"{name}_value"] = value
            row[f"{name}_time"] = report.wall_times[name]
    if "ga" in methods:
        t0 = time.perf_counter()
        cfg = ga_mod.paper_preset(inst.n, row["density"] or 0.5, rng_seed=seed)
        if ls_iters is not None:
            from dataclasses import replace

            cfg = replace(cfg, ls_iters=ls_iters)
        res = ga_mod.run_ga(inst, cfg)
        row["GA_value"] = res.value
        row["GA_time"] = time.perf_counter() - t0
        best_ub = res.value
    row["best_lb"] = best_lb
    row["best_ub"] = best_ub
    if best_ub is not None and best_lb <= best_ub:
        rep = metrics(best_lb, best_ub, best_ub)
        row["deviation"] = _fmt_frac(rep.deviation_from_lb)
        row["gap"] = _fmt_frac(rep.gap)
    else:
        row["deviation"] = row["gap"] = "NA"
    return row


def _id_fields(inst: Instance) -> tuple[int | None, float | None]:
    """Class and density recovered from generated ids, else empirical density."""
    cls = dens = None
    for tok in (inst.id or "").split("-"):
        if tok.startswith("k") and tok[1:].isdigit():
            cls = int(tok[1:])
        if tok.startswith("p"):
            try:
                dens = float(tok[1:])
            except ValueError:
                pass
    if dens is None:
        pairs = inst.n * (inst.n - 1) / 2
        dens = round(len(inst.conflict_pairs()) / pairs, 3) if pairs else 0.0
    return cls, dens


def cmd_bench(args) -> int:
    paths = sorted(Path(args.directory).glob("*.txt")) + sorted(Path(args.directory).glob("*.txt.gz"))
    if not paths:
        print(f"no instance files in {args.directory}", file=sys.stderr)
        return 1
    methods = args.methods.split(",")
    payloads = [(str(p), methods, args.seed, args.ls_iters) for p in paths]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_worker, payloads))
    else:
        rows = [_bench_worker(pl) for pl in payloads]

    fieldnames = ["schema"] + sorted({k for row in rows for k in row}, key=_field_order)
    out_path = Path(args.out)
    with open(out_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({"schema": CSV_SCHEMA, **row})

    agg_rows = _aggregate(rows)
    agg_path = out_path.with_suffix(".agg.csv")
    if agg_rows:
        with open(agg_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(agg_rows[0].keys()))
            writer.writeheader()
            writer.writerows(agg_rows)
    if args.json:
        Path(args.json).write_text(json.dumps(rows, indent=2, default=str))
    print(f"wrote {out_path} ({len(rows)} rows) and {agg_path} ({len(agg_rows)} groups)")
    return 0


_FIELD_ORDER = [
    "instance", "n", "m", "class", "density",
    "LB1_value", "LB1_time", "LB2_value", "LB2_time",
    "LB3_value", "LB3_time", "LB4_value", "LB4_time",
    "GA_value", "GA_time", "best_lb", "best_ub", "deviation", "gap",
]


def _field_order(name: str) -> tuple[int, str]:
    return (_FIELD_ORDER.index(name), name) if name in _FIELD_ORDER else (len(_FIELD_ORDER), name)


def _aggregate(rows: list[dict]) -> list[dict]:
    """Per (density, n, m) group: how often each bound is best (b), its mean
    deviation from the best bound (c), and its mean wall time (d)."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row.get("density"), row["n"], row["m"]), []).append(row)
    out = []
    bound_names = ["LB1", "LB2", "LB3", "LB4"]
    for (density, n, m), members in sorted(groups.items(), key=str):
        rec = {"density": density, "n": n, "m": m, "count": len(members)}
        if f"{bound_names[0]}_value" not in members[0]:
            out.append(rec)
            continue
        for name in bound_names:
            hits, devs, times = 0, [], []
            for row in members:
                values = {b: row[f"{b}_value"] for b in bound_names}
                best = max(values.values())
                if values[name] == best:
                    hits += 1
                devs.append((best - values[name]) / best if best > 0 else 0.0)
                times.append(row[f"{name}_time"])
            rec[f"{name}_b_pct"] = round(100.0 * hits / len(members), 3)
            rec[f"{name}_c_pct"] = round(100.0 * sum(devs) / len(devs), 3)
            rec[f"{name}_d_sec"] = round(sum(times) / len(times), 6)
        out.append(rec)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confsched",
        description="Scheduling under a conflict graph: generate, bound, solve, export.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate benchmark instances")
    g.add_argument("--out", default=".", help="output directory")
    g.add_argument("--seed", type=int, required=False, help="master seed (required)")
    g.add_argument("--n", help="job count (or comma list with --grid)")
    g.add_argument("--m", help="machine count (or comma list with --grid)")
    g.add_argument("--class", dest="proc_class", type=int, default=1, help="class 1..6")
    g.add_argument("--density", type=float, default=0.5, help="conflict edge probability")
    g.add_argument("--count", type=int, help="instances per cell (default 1, grid 20)")
    g.add_argument("--grid", choices=["paper"], help="generate the benchmark grid")
    g.add_argument("--classes", help="comma list of classes for --grid")
    g.add_argument("--densities", help="comma list of densities for --grid")
    g.add_argument("--graphs", type=int, help="conflict graphs per density (grid, default 5)")
    g.set_defaults(fn=cmd_gen)

    s = sub.add_parser("solve", help="solve one instance (polynomial router, then GA)")
    s.add_argument("instance")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--preset", choices=["paper", "base"], default="paper")
    s.add_argument("--density", type=float, help="density preset override (else inferred)")
    s.add_argument("--pop-size", dest="pop_size", type=int)
    s.add_argument("--mutation-prob", dest="mutation_prob", type=float)
    s.add_argument("--max-iters", dest="max_iters", type=int)
    s.add_argument("--max-no-improve", dest="max_no_improve", type=int)
    s.add_argument("--max-dup-tries", dest="max_dup_tries", type=int)
    s.add_argument("--decoder", choices=["fifo", "gt", "ectf", "nd"])
    s.add_argument("--crossover", choices=["x1", "ox", "lox"])
    s.add_argument("--mutation", choices=["swap", "move"])
    s.add_argument("--seeding", choices=["random", "hybrid"])
    s.add_argument("--ls-iters", dest="ls_iters", type=int)
    s.set_defaults(fn=cmd_solve)

    b = sub.add_parser("bounds", help="print LB1..LB4 and the best bound")
    b.add_argument("instance")
    b.set_defaults(fn=cmd_bounds)

    e = sub.add_parser("exact", help="desk-scale exact optimum (guarded)")
    e.add_argument("instance")
    e.add_argument("--time-indexed", action="store_true", help="use the time-indexed oracle")
    e.add_argument("--horizon", type=int)
    e.set_defaults(fn=cmd_exact)

    x = sub.add_parser("export", help="write .lp model and .start warm-start files")
    x.add_argument("instance")
    x.add_argument("--formulation", choices=["F1", "F2", "F3"], required=True)
    x.add_argument("--horizon", type=int)
    x.add_argument("--out", help="output stem (default: instance path)")
    x.set_defaults(fn=cmd_export)

    bench = sub.add_parser("bench", help="run bounds/GA over a directory of instances")
    bench.add_argument("directory")
    bench.add_argument("--methods", default="bounds,ga")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--jobs", type=int, default=1, help="parallel workers across instances")
    bench.add_argument("--ls-iters", dest="ls_iters", type=int)
    bench.add_argument("--out", default="bench.csv")
    bench.add_argument("--json", help="also mirror rows to a JSON file")
    bench.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gen" and args.seed is None:
            parser.error("gen requires an explicit --seed for reproducibility")
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (
        OSError,
        ValueError,
        RuntimeError,
        SizeGuardError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

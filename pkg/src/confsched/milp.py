"""Mixed-integer model builders, LP-file export, warm starts, and result ingest.

Three formulations of the conflict-scheduling problem are built as explicit
variable/constraint structures and written in the plain-text LP dialect
(Minimize / Subject To / Bounds / Binaries / End):

* F1, time-indexed: binary x_{i,j,t} = job j starts on machine i at time t.
* F2, time-and-precedence: binary xp_{j,k,t} = job k runs immediately after
  job j on the same machine and starts at t, plus order binaries y_{j,k} for
  conflicting pairs. A fictitious job 0 with p_0 = 0 caps each machine chain.
* F3, precedence: binary x_{j,k} = job k runs immediately after job j on the
  same machine, order binaries y_{j,k} for conflicting pairs, and continuous
  completion times C_j >= p_j, sequenced through big-T constraints.

Variable names are stable: x_i_j_t (F1, 1-based machines/jobs), xp_j_k_t and
y_j_k (F2), x_j_k / y_j_k / C_j (F3); job label 0 is the fictitious job, real
jobs are labeled 1..n. Times are 0-based. The default horizon T = sum p_j is
safe because an optimal schedule exists with no fully idle instant before
its makespan.

No solver is embedded. Warm starts are exported as `name value` lines;
external solver outcomes re-enter through `ingest_solver_result`, which
parses `key=value` text (keys: status, objective, bound).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .core import Instance, Schedule, check_feasible, total_flow_time
from .decoders import ECTF, decode

F1, F2, F3 = "F1", "F2", "F3"
FORMULATIONS = (F1, F2, F3)

LE, GE, EQ = "<=", ">=", "="


class HorizonError(ValueError):
    """Requested horizon cannot accommodate a feasible schedule."""


class ResultFormatError(ValueError):
    """Malformed solver-result or LP file."""


@dataclass
class Variable:
    name: str
    kind: str  # 'binary' | 'continuous'
    lb: int = 0
    ub: int | None = None  # None = +inf (binaries implicitly [0, 1])


@dataclass
class Constraint:
    name: str
    terms: dict[str, int]
    sense: str
    rhs: int


@dataclass
class MilpModel:
    name: str
    horizon: int
    variables: dict[str, Variable] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[str, int] = field(default_factory=dict)

    def add_var(self, name: str, kind: str, lb: int = 0, ub: int | None = None) -> None:
        if name in self.variables:
            raise ValueError(f"duplicate variable {name}")
        self.variables[name] = Variable(name, kind, lb, ub)

    def add_constraint(self, name: str, terms: dict[str, int], sense: str, rhs: int) -> None:
        terms = {v: c for v, c in terms.items() if c != 0}
        for v in terms:
            if v not in self.variables:
                raise ValueError(f"constraint {name} references undeclared variable {v}")
        if not terms:
            return  # vacuous (possible only with zero-length jobs); nothing to emit
        self.constraints.append(Constraint(name, terms, sense, rhs))

    def objective_value(self, assignment: dict[str, int | float]) -> int | float:
        return sum(coef * assignment.get(var, 0) for var, coef in self.objective.items())

    def check_assignment(self, assignment: dict[str, int | float]) -> list[str]:
        """All violated constraint/bound names for the given (sparse) assignment;
        unlisted variables default to 0."""
        violations = []
        for var in assignment:
            if var not in self.variables:
                violations.append(f"unknown variable {var}")
        for var in self.variables.values():
            val = assignment.get(var.name, 0)
            if var.kind == "binary":
                if val not in (0, 1):
                    violations.append(f"binary {var.name} = {val}")
            else:
                if val < var.lb or (var.ub is not None and val > var.ub):
                    violations.append(f"bound {var.name} = {val} not in [{var.lb}, {var.ub}]")
        for con in self.constraints:
            lhs = sum(coef * assignment.get(var, 0) for var, coef in con.terms.items())
            ok = (
                lhs <= con.rhs
                if con.sense == LE
                else lhs >= con.rhs if con.sense == GE else lhs == con.rhs
            )
            if not ok:
                violations.append(f"{con.name}: {lhs} {con.sense} {con.rhs}")
        return violations


def default_horizon(inst: Instance) -> int:
    return int(inst.proc.sum())


def _resolve_horizon(inst: Instance, horizon: int | None) -> int:
    T = default_horizon(inst) if horizon is None else horizon
    if T < int(inst.proc.max(initial=0)):
        raise HorizonError(
            f"horizon {T} is below the longest processing time "
            f"{int(inst.proc.max(initial=0))}; no schedule can fit"
        )
    return T


def _start_window(t: int, p: int, T: int) -> range:
    """Start times s with s <= t < s + p and s within [0, T - p]."""
    return range(max(0, t - p + 1), min(t, T - p) + 1)


def _build_f1(inst: Instance, T: int) -> MilpModel:
    n, m = inst.n, inst.m
    p = [int(x) for x in inst.proc]
    model = MilpModel(name=f"{inst.id or 'instance'}-F1", horizon=T)
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            for t in range(T - p[j - 1] + 1):
                model.add_var(f"x_{i}_{j}_{t}", "binary")
    for j in range(1, n + 1):
        for i in range(1, m + 1):
            for t in range(T - p[j - 1] + 1):
                model.objective[f"x_{i}_{j}_{t}"] = t + p[j - 1]
    for j in range(1, n + 1):
        terms = {
            f"x_{i}_{j}_{t}": 1 for i in range(1, m + 1) for t in range(T - p[j - 1] + 1)
        }
        model.add_constraint(f"assign_{j}", terms, EQ, 1)
    for i in range(1, m + 1):
        for t in range(T):
            terms = {}
            for j in range(1, n + 1):
                if p[j - 1] == 0:
                    continue
                for s in _start_window(t, p[j - 1], T):
                    terms[f"x_{i}_{j}_{s}"] = 1
            model.add_constraint(f"cap_{i}_{t}", terms, LE, 1)
    for j, k in inst.conflict_pairs():
        ja, ka = j + 1, k + 1
        for t in range(T):
            terms = {}
            for job, pj in ((ja, p[j]), (ka, p[k])):
                if pj == 0:
                    continue
                for i in range(1, m + 1):
                    for s in _start_window(t, pj, T):
                        terms[f"x_{i}_{job}_{s}"] = 1
            model.add_constraint(f"conf_{ja}_{ka}_{t}", terms, LE, 1)
    return model


def _f2_var_range(pj: int, pk: int, T: int) -> range:
    return range(pj, T - pk + 1)


def _build_f2(inst: Instance, T: int) -> MilpModel:
    n = inst.n
    p = [0] + [int(x) for x in inst.proc]  # p[0] is the fictitious job
    model = MilpModel(name=f"{inst.id or 'instance'}-F2", horizon=T)
    jobs = range(n + 1)
    for j in jobs:
        for k in jobs:
            if j == k:
                continue
            for t in _f2_var_range(p[j], p[k], T):
                model.add_var(f"xp_{j}_{k}_{t}", "binary")
    pairs = [(j + 1, k + 1) for j, k in inst.conflict_pairs()]
    for j, k in pairs:
        model.add_var(f"y_{j}_{k}", "binary")

    for j in jobs:
        for k in range(1, n + 1):
            if j == k:
                continue
            for t in _f2_var_range(p[j], p[k], T):
                model.objective[f"xp_{j}_{k}_{t}"] = t + p[k]

    model.add_constraint(
        "src_degree",
        {f"xp_0_{k}_{t}": 1 for k in range(1, n + 1) for t in _f2_var_range(0, p[k], T)},
        LE,
        inst.m,
    )
    model.add_constraint(
        "sink_degree",
        {f"xp_{j}_0_{t}": 1 for j in range(1, n + 1) for t in _f2_var_range(p[j], 0, T)},
        LE,
        inst.m,
    )
    for k in range(1, n + 1):
        terms = {
            f"xp_{j}_{k}_{t}": 1
            for j in jobs
            if j != k
            for t in _f2_var_range(p[j], p[k], T)
        }
        model.add_constraint(f"pred_{k}", terms, EQ, 1)
    for k in range(1, n + 1):
        terms = {
            f"xp_{k}_{j}_{t}": 1
            for j in jobs
            if j != k
            for t in _f2_var_range(p[k], p[j], T)
        }
        model.add_constraint(f"succ_{k}", terms, EQ, 1)
    # Flow linkage: a job starting at t hands its machine over no earlier
    # than t + p_k. With unit in/out degrees this pins chains in time.
    for k in range(1, n + 1):
        for t in range(T - p[k] + 1):
            terms: dict[str, int] = {}
            for j in jobs:
                if j == k or t < p[j]:
                    continue
                terms[f"xp_{j}_{k}_{t}"] = 1
            for j in jobs:
                if j == k:
                    continue
                for t2 in range(t + p[k], T - p[j] + 1):
                    terms[f"xp_{k}_{j}_{t2}"] = terms.get(f"xp_{k}_{j}_{t2}", 0) - 1
            model.add_constraint(f"flow_{k}_{t}", terms, LE, 0)
    for j, k in pairs:
        before: dict[str, int] = {}
        for l in jobs:
            if l != j:
                for t in _f2_var_range(p[l], p[j], T):
                    before[f"xp_{l}_{j}_{t}"] = t + p[j]
        for l in jobs:
            if l != k:
                for t in _f2_var_range(p[l], p[k], T):
                    before[f"xp_{l}_{k}_{t}"] = before.get(f"xp_{l}_{k}_{t}", 0) - t
        before[f"y_{j}_{k}"] = T
        model.add_constraint(f"conf_before_{j}_{k}", before, LE, T)

        after: dict[str, int] = {}
        for l in jobs:
            if l != j:
                for t in _f2_var_range(p[l], p[j], T):
                    after[f"xp_{l}_{j}_{t}"] = t
        for l in jobs:
            if l != k:
                for t in _f2_var_range(p[l], p[k], T):
                    after[f"xp_{l}_{k}_{t}"] = after.get(f"xp_{l}_{k}_{t}", 0) - (t + p[k])
        after[f"y_{j}_{k}"] = T
        model.add_constraint(f"conf_after_{j}_{k}", after, GE, 0)
    return model


def _build_f3(inst: Instance, T: int) -> MilpModel:
    n = inst.n
    p = [0] + [int(x) for x in inst.proc]
    model = MilpModel(name=f"{inst.id or 'instance'}-F3", horizon=T)
    jobs = range(n + 1)
    for j in jobs:
        for k in jobs:
            if j != k:
                model.add_var(f"x_{j}_{k}", "binary")
    pairs = [(j + 1, k + 1) for j, k in inst.conflict_pairs()]
    for j, k in pairs:
        model.add_var(f"y_{j}_{k}", "binary")
    for j in range(1, n + 1):
        model.add_var(f"C_{j}", "continuous", lb=p[j])
        model.objective[f"C_{j}"] = 1

    model.add_constraint("src_degree", {f"x_0_{k}": 1 for k in range(1, n + 1)}, LE, inst.m)
    model.add_constraint("sink_degree", {f"x_{j}_0": 1 for j in range(1, n + 1)}, LE, inst.m)
    for k in range(1, n + 1):
        model.add_constraint(
            f"pred_{k}", {f"x_{j}_{k}": 1 for j in jobs if j != k}, EQ, 1
        )
    for j in range(1, n + 1):
        model.add_constraint(
            f"succ_{j}", {f"x_{j}_{k}": 1 for k in jobs if k != j}, EQ, 1
        )
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            if j == k:
                continue
            model.add_constraint(
                f"seq_{j}_{k}",
                {f"C_{j}": 1, f"C_{k}": -1, f"x_{j}_{k}": T},
                LE,
                T - p[k],
            )
    for j, k in pairs:
        model.add_constraint(
            f"confseq_{j}_{k}", {f"C_{j}": 1, f"C_{k}": -1, f"y_{j}_{k}": T}, LE, T - p[k]
        )
        model.add_constraint(
            f"confrev_{j}_{k}", {f"C_{j}": 1, f"C_{k}": -1, f"y_{j}_{k}": T}, GE, p[j]
        )
    return model


def build_model(inst: Instance, variant: str, horizon: int | None = None) -> MilpModel:
    T = _resolve_horizon(inst, horizon)
    if variant == F1:
        return _build_f1(inst, T)
    if variant == F2:
        return _build_f2(inst, T)
    if variant == F3:
        return _build_f3(inst, T)
    raise ValueError(f"unknown formulation {variant!r}; expected one of {FORMULATIONS}")


def f1_variable_count(inst: Instance, T: int) -> int:
    return int(sum(inst.m * (T - int(pj) + 1) for pj in inst.proc))


def f1_constraint_count(inst: Instance, T: int) -> int:
    """Valid for instances with all p_j >= 1 (no vacuous capacity rows)."""
    return inst.n + inst.m * T + len(inst.conflict_pairs()) * T


def f3_variable_count(inst: Instance) -> int:
    n = inst.n
    return (n + 1) * n + len(inst.conflict_pairs()) + n


def f3_constraint_count(inst: Instance) -> int:
    n = inst.n
    return 2 + 2 * n + n * (n - 1) + 2 * len(inst.conflict_pairs())


def _format_terms(terms: dict[str, int]) -> str:
    parts = []
    for var, coef in terms.items():
        if coef == 1:
            parts.append(f"+ {var}")
        elif coef == -1:
            parts.append(f"- {var}")
        elif coef >= 0:
            parts.append(f"+ {coef} {var}")
        else:
            parts.append(f"- {-coef} {var}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def _wrap(prefix: str, body: str, limit: int = 200) -> list[str]:
    words = body.split(" ")
    lines: list[str] = []
    cur = prefix
    for word in words:
        if len(cur) + 1 + len(word) > limit and cur != prefix:
            lines.append(cur)
            cur = " " + word
        else:
            cur += " " + word
    lines.append(cur)
    return lines


def export_lp(model: MilpModel, path) -> None:
    """Write the model in the plain-text LP dialect; byte-deterministic."""
    out: list[str] = [f"\\ {model.name}", "Minimize"]
    out.extend(_wrap(" obj:", _format_terms(model.objective)))
    out.append("Subject To")
    for con in model.constraints:
        rhs = f"{con.sense} {con.rhs}"
        out.extend(_wrap(f" {con.name}:", f"{_format_terms(con.terms)} {rhs}"))
    bounded = [v for v in model.variables.values() if v.kind == "continuous"]
    if bounded:
        out.append("Bounds")
        for v in bounded:
            ub = "+inf" if v.ub is None else str(v.ub)
            out.append(f" {v.lb} <= {v.name} <= {ub}")
    binaries = [v.name for v in model.variables.values() if v.kind == "binary"]
    if binaries:
        out.append("Binaries")
        out.extend(_wrap(" ", " ".join(binaries)))
    out.append("End")
    Path(path).write_text("\n".join(out) + "\n", encoding="ascii")


def parse_lp(path) -> dict:
    """Read back the dialect written by export_lp (objective, constraints,
    bounds, binaries); enough structure for round-trip checks."""
    text = Path(path).read_text(encoding="ascii")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("\\")]
    section = None
    merged: list[str] = []
    sections = {"minimize": [], "subject to": [], "bounds": [], "binaries": []}
    for ln in lines:
        key = ln.strip().lower()
        if key in ("minimize", "subject to", "bounds", "binaries", "end"):
            section = None if key == "end" else key
            continue
        if section is None:
            raise ResultFormatError(f"content outside any LP section: {ln!r}")
        if ln.startswith(" ") and ":" not in ln and section in ("minimize", "subject to"):
            sections[section][-1] += ln  # continuation line
        else:
            sections[section].append(ln)

    def parse_expr(tokens: list[str]) -> dict[str, int]:
        terms: dict[str, int] = {}
        sign, coef = 1, None
        for tok in tokens:
            if tok == "+":
                sign, coef = 1, None
            elif tok == "-":
                sign, coef = -1, None
            elif tok.lstrip("+-").isdigit():
                coef = int(tok)
            else:
                terms[tok] = terms.get(tok, 0) + sign * (1 if coef is None else coef)
                sign, coef = 1, None
        return terms

    def parse_row(row: str) -> tuple[str, dict[str, int], str | None, int | None]:
        name, _, body = row.partition(":")
        tokens = body.split()
        for idx, tok in enumerate(tokens):
            if tok in (LE, GE, EQ):
                return name.strip(), parse_expr(tokens[:idx]), tok, int(tokens[idx + 1])
        return name.strip(), parse_expr(tokens), None, None

    objective = parse_row(sections["minimize"][0])[1] if sections["minimize"] else {}
    constraints = []
    for row in sections["subject to"]:
        name, terms, sense, rhs = parse_row(row)
        constraints.append(Constraint(name, terms, sense, rhs))
    bounds = {}
    for row in sections["bounds"]:
        toks = row.split()  # "<lb> <= <name> <= <ub>"
        bounds[toks[2]] = (int(toks[0]), None if toks[4] == "+inf" else int(toks[4]))
    binaries = " ".join(sections["binaries"]).split()
    return {
        "objective": objective,
        "constraints": constraints,
        "bounds": bounds,
        "binaries": binaries,
    }


def _machine_chains(inst: Instance, sched: Schedule) -> list[list[int]]:
    chains = []
    for i in range(inst.m):
        jobs = sorted(
            (int(j) for j in np.flatnonzero(sched.machine_of == i)),
            key=lambda j: (int(sched.start_of[j]), int(sched.start_of[j] + inst.proc[j]), j),
        )
        chains.append(jobs)
    return chains


def schedule_assignment(inst: Instance, sched: Schedule, variant: str, T: int) -> dict[str, int]:
    """Translate a feasible schedule into a (sparse) variable assignment."""
    starts = sched.start_of
    comps = sched.start_of + inst.proc
    if int(comps.max(initial=0)) > T:
        raise HorizonError(f"schedule makespan {int(comps.max(initial=0))} exceeds horizon {T}")
    assign: dict[str, int] = {}
    if variant == F1:
        for j in range(inst.n):
            assign[f"x_{int(sched.machine_of[j]) + 1}_{j + 1}_{int(starts[j])}"] = 1
        return assign
    chains = _machine_chains(inst, sched)
    if variant == F2:
        for chain in chains:
            if not chain:
                continue
            first, last = chain[0], chain[-1]
            assign[f"xp_0_{first + 1}_{int(starts[first])}"] = 1
            for a, b in zip(chain, chain[1:]):
                assign[f"xp_{a + 1}_{b + 1}_{int(starts[b])}"] = 1
            assign[f"xp_{last + 1}_0_{int(comps[last])}"] = 1
    elif variant == F3:
        for chain in chains:
            if not chain:
                continue
            assign[f"x_0_{chain[0] + 1}"] = 1
            for a, b in zip(chain, chain[1:]):
                assign[f"x_{a + 1}_{b + 1}"] = 1
            assign[f"x_{chain[-1] + 1}_0"] = 1
        for j in range(inst.n):
            assign[f"C_{j + 1}"] = int(comps[j])
    else:
        raise ValueError(f"unknown formulation {variant!r}")
    if variant in (F2, F3):
        for j, k in inst.conflict_pairs():
            assign[f"y_{j + 1}_{k + 1}"] = 1 if comps[j] <= starts[k] else 0
    return assign


def warm_start(inst: Instance, variant: str, horizon: int | None = None) -> dict[str, int]:
    """Feasible starting assignment from the earliest-completion-time decoder
    applied to the identity permutation."""
    T = _resolve_horizon(inst, horizon)
    sched, value = decode(inst, list(range(inst.n)), ECTF)
    assert check_feasible(inst, sched) and value == total_flow_time(inst, sched)
    return schedule_assignment(inst, sched, variant, T)


def write_warm_start(assignment: dict[str, int], path) -> None:
    lines = [f"{name} {value}" for name, value in assignment.items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_warm_start(path) -> dict[str, int]:
    assignment = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="ascii").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ResultFormatError(f"line {lineno}: expected 'name value', got {line!r}")
        assignment[parts[0]] = int(parts[1])
    return assignment


class SolverResult(NamedTuple):
    lb: float | None
    ub: float | None
    status: str


def _parse_number(text: str) -> float | int:
    try:
        return int(text)
    except ValueError:
        try:
            return float(text)
        except ValueError as exc:
            raise ResultFormatError(f"not a number: {text!r}") from exc


def ingest_solver_result(path) -> SolverResult:
    """Parse `key=value` tokens from an external solver adapter.

    Recognized keys: status (required), objective (incumbent value, the UB),
    bound (best proven LB). A missing bound means the solver produced none
    within its limit; that absence is preserved as None.
    """
    tokens = Path(path).read_text(encoding="ascii").split()
    fields: dict[str, str] = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep or not key:
            raise ResultFormatError(f"malformed token {tok!r}; expected key=value")
        fields[key] = value
    if "status" not in fields:
        raise ResultFormatError("missing required key 'status'")
    ub = _parse_number(fields["objective"]) if "objective" in fields else None
    lb = _parse_number(fields["bound"]) if "bound" in fields else None
    return SolverResult(lb=lb, ub=ub, status=fields["status"])

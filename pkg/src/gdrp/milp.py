"""Symbolic MILP: linearized model construction, LP export and evaluation.

Variable families: x (arc binaries), w (departure weights), u (sequence
positions), z (= x*w products), s (MTZ lifting products), y (customer-to-
unit indicators, symmetry breaking only), r (service start times, time
windows only). Constraint tags follow the linearized formulation: 6..16
for the base rows, B2..B16 for the reformulation, C1/C2 for the volume
and time-window extensions, plus two invented tags:
"flow" for per-unit flow conservation (the printed equation set lacks it,
letting relaxations swap units mid-route) and "dispatch" for optional rows
forcing every unit out (Σ_j x_0jkt >= 1).
"""

import math
import re
import warnings
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .energy import tour_weight_profile
from .feasibility import check_solution, service_start_times
from .model import Fleet, Instance

EVAL_TOL = 1e-6


class MissingVariable(KeyError):
    """Assignment lacks a variable referenced by the model."""


class InfeasibleInput(ValueError):
    """solution_to_assignment was given a combinatorially infeasible solution."""


class SymmetryEncodingTooLarge(UserWarning):
    """Lexicographic symmetry weights 2^(n-i) exceed exact float range."""


# Powers of two are exact doubles up to 2^52; beyond that the lexicographic
# encoding silently loses bits, so it is dropped in favor of B14 only.
MAX_LEX_N = 52


@dataclass(frozen=True, order=True)
class VariableIndex:
    family: str
    indices: Tuple[int, ...]

    @property
    def name(self) -> str:
        return "_".join([self.family] + [str(i) for i in self.indices])


@dataclass(frozen=True)
class VariableDef:
    index: VariableIndex
    lower: float
    upper: float
    binary: bool = False


@dataclass(frozen=True)
class LinearConstraint:
    tag: str
    name: str
    coeffs: Dict[VariableIndex, float]
    sense: str  # "<=", "=", ">="
    rhs: float


@dataclass
class MilpModel:
    n: int
    variables: List[VariableDef]
    objective: Dict[VariableIndex, float]
    constraints: List[LinearConstraint]
    symmetry_breaking: bool
    time_windows: bool
    dispatch: str
    units: List[Tuple[int, int]]  # (type_id, unit)

    def __post_init__(self):
        self._defs = {v.index: v for v in self.variables}

    def var_def(self, index: VariableIndex) -> VariableDef:
        return self._defs[index]

    def has_var(self, index: VariableIndex) -> bool:
        return index in self._defs

    def counts_by_tag(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for c in self.constraints:
            out[c.tag] = out.get(c.tag, 0) + 1
        return out


def _vi(family: str, *indices: int) -> VariableIndex:
    return VariableIndex(family=family, indices=tuple(indices))


def _leg_coef(instance: Instance, dtype, i: int, j: int) -> float:
    el, ef = dtype.takeoff_coeff, dtype.flight_coeff
    if instance.leg_coeff_overrides:
        ovr = instance.leg_coeff_overrides.get(dtype.type_id)
        if ovr is not None:
            if ovr.takeoff is not None:
                el = float(ovr.takeoff[i, j])
            if ovr.flight is not None:
                ef = float(ovr.flight[i, j])
    return el + ef * instance.distance(i, j)


def build_model(instance: Instance, fleet: Fleet, symmetry_breaking: bool = True,
                time_windows: bool = False, dispatch: str = "optional") -> MilpModel:
    """Assemble the fully linearized model for the given instance and fleet."""
    n = instance.n
    if n < 1:
        raise ValueError("instance must have at least one customer")
    if dispatch not in ("optional", "required"):
        raise ValueError("dispatch must be 'optional' or 'required'")
    nodes = range(n + 1)
    cust = range(1, n + 1)
    mass = {c.id: c.package_mass for c in instance.customers}

    use_lex = symmetry_breaking
    if symmetry_breaking and n > MAX_LEX_N:
        warnings.warn("n=%d exceeds the exact-float range of the lexicographic "
                      "ordering; keeping only the dispatch-order rows" % n,
                      SymmetryEncodingTooLarge)
        use_lex = False

    if time_windows:
        for dtype in fleet.types:
            if dtype.speed is None:
                raise ValueError("time windows need a speed for type %d" % dtype.type_id)
        for c in instance.customers:
            if c.time_window is None:
                raise ValueError("customer %d lacks a time window" % c.id)
            if not math.isfinite(c.time_window[1]):
                raise ValueError("customer %d has an infinite due time; the "
                                 "big-M linearization needs finite windows" % c.id)

    variables: List[VariableDef] = []
    objective: Dict[VariableIndex, float] = {}
    cons: List[LinearConstraint] = []
    units = [(t.type_id, u) for t in fleet.types for u in range(1, t.count + 1)]

    for dtype in fleet.types:
        k = dtype.type_id
        for t in range(1, dtype.count + 1):
            for i in nodes:
                variables.append(VariableDef(_vi("w", i, k, t), dtype.self_mass,
                                             dtype.max_total_mass))
                for j in nodes:
                    variables.append(VariableDef(_vi("x", i, j, k, t), 0.0, 1.0, binary=True))
                    variables.append(VariableDef(_vi("z", i, j, k, t), 0.0,
                                                 dtype.max_total_mass))
            if not time_windows:
                for i in cust:
                    variables.append(VariableDef(_vi("u", i, k, t), 1.0, float(n)))
                    for j in cust:
                        if i != j:
                            variables.append(VariableDef(_vi("s", i, j, k, t), 0.0, float(n)))
            else:
                for i in cust:
                    a, b = instance.customers[i - 1].time_window
                    variables.append(VariableDef(_vi("r", i, k, t), a, b))
            if use_lex:
                for i in cust:
                    variables.append(VariableDef(_vi("y", i, k, t), 0.0, 1.0, binary=True))

    for dtype in fleet.types:
        k = dtype.type_id
        for t in range(1, dtype.count + 1):
            for i in nodes:
                for j in nodes:
                    objective[_vi("z", i, j, k, t)] = _leg_coef(instance, dtype, i, j)

    def add(tag: str, idx: Sequence[int], coeffs: Dict[VariableIndex, float],
            sense: str, rhs: float) -> None:
        name = "c" + tag + "".join("_%d" % v for v in idx)
        cons.append(LinearConstraint(tag=tag, name=name,
                                     coeffs={k: v for k, v in coeffs.items() if v != 0.0},
                                     sense=sense, rhs=rhs))

    # coverage (6)-(7)
    for j in cust:
        add("6", (j,), {_vi("x", i, j, k, t): 1.0
                        for (k, t) in units for i in nodes}, "=", 1.0)
    for i in cust:
        add("7", (i,), {_vi("x", i, j, k, t): 1.0
                        for (k, t) in units for j in nodes}, "=", 1.0)

    for dtype in fleet.types:
        k = dtype.type_id
        m0, cap_w, cap_e = dtype.self_mass, dtype.max_total_mass, dtype.energy_capacity
        for t in range(1, dtype.count + 1):
            # tour usage (8)-(9), linkage (10)
            add("8", (k, t), {_vi("x", 0, j, k, t): 1.0 for j in cust}, "<=", 1.0)
            add("9", (k, t), {_vi("x", i, 0, k, t): 1.0 for i in cust}, "<=", 1.0)
            start = {_vi("x", 0, j, k, t): 1.0 for j in cust}
            for i in cust:
                for j in nodes:
                    co = dict(start)
                    key = _vi("x", i, j, k, t)
                    co[key] = co.get(key, 0.0) - 1.0
                    add("10", (i, j, k, t), {a: -b for a, b in co.items()}, "<=", 0.0)
            # per-unit flow conservation: the unit entering a customer is the
            # unit leaving it. Absent from the printed equation set, but
            # without it the relaxation mixes units mid-route (coverage rows
            # only bind fleet-wide) and external solvers certify nothing.
            for j in cust:
                co = {}
                for i in nodes:
                    key = _vi("x", i, j, k, t)
                    co[key] = co.get(key, 0.0) + 1.0
                    key = _vi("x", j, i, k, t)
                    co[key] = co.get(key, 0.0) - 1.0
                add("flow", (j, k, t), co, "=", 0.0)
            # launch weight (11), weight cap (14)
            co = {_vi("w", 0, k, t): 1.0}
            for i in cust:
                for j in nodes:
                    co[_vi("x", i, j, k, t)] = -mass[i]
            add("11", (k, t), co, "=", m0)
            add("14", (k, t), {_vi("w", 0, k, t): 1.0}, "<=", cap_w)
            # no self loops (16)
            for i in nodes:
                add("16", (i, k, t), {_vi("x", i, i, k, t): 1.0}, "=", 0.0)
            # product linearization (B2)-(B5)
            for i in nodes:
                for j in nodes:
                    x, z, w = _vi("x", i, j, k, t), _vi("z", i, j, k, t), _vi("w", i, k, t)
                    add("B2", (i, j, k, t), {z: 1.0, x: -cap_w}, "<=", 0.0)
                    add("B3", (i, j, k, t), {z: 1.0, x: -m0}, ">=", 0.0)
                    add("B4", (i, j, k, t), {z: 1.0, w: -1.0, x: -m0}, "<=", -m0)
                    add("B5", (i, j, k, t), {z: 1.0, w: -1.0, x: -cap_w}, ">=", -cap_w)
            # energy cap (B6)
            add("B6", (k, t), {_vi("z", i, j, k, t): _leg_coef(instance, dtype, i, j)
                               for i in nodes for j in nodes}, "<=", cap_e)
            # weight propagation (B7)-(B8)
            for i in nodes:
                for j in cust:
                    wi, wj, x = _vi("w", i, k, t), _vi("w", j, k, t), _vi("x", i, j, k, t)
                    big = cap_w - m0 - mass[j]
                    co = {wi: 1.0, x: big}
                    co[wj] = co.get(wj, 0.0) - 1.0
                    add("B7", (i, j, k, t), co, "<=", cap_w - m0)
                    co = {wi: 1.0, x: -big}
                    co[wj] = co.get(wj, 0.0) - 1.0
                    add("B8", (i, j, k, t), co, ">=", m0 - cap_w)
            if not time_windows:
                # lifted MTZ (B9)-(B13). As printed, the B9 right-hand side is
                # (tour size - 1), which is -1 for an idle tour: the row then
                # forces every unit out. Under the optional-dispatch model the
                # depot-departure terms are cancelled instead (inner arcs
                # only), which is slack for idle tours and identical for used
                # ones; depot-less arc cycles stay excluded via rows (10).
                visited = {_vi("x", i2, j2, k, t): 1.0 for i2 in nodes for j2 in cust}
                if dispatch == "required":
                    b9_sum, b9_rhs = visited, -1.0
                else:
                    b9_sum = {_vi("x", i2, j2, k, t): 1.0 for i2 in cust for j2 in cust}
                    b9_rhs = 0.0
                for i in cust:
                    for j in cust:
                        if i == j:
                            continue
                        s = _vi("s", i, j, k, t)
                        x = _vi("x", i, j, k, t)
                        co = {_vi("u", i, k, t): 1.0, s: 1.0}
                        co[_vi("u", j, k, t)] = -1.0
                        for key, val in b9_sum.items():
                            co[key] = co.get(key, 0.0) - val
                        add("B9", (i, j, k, t), co, "<=", b9_rhs)
                        add("B10", (i, j, k, t), {s: 1.0, x: -float(n)}, "<=", 0.0)
                        co = {s: 1.0}
                        for key, val in visited.items():
                            co[key] = co.get(key, 0.0) - val
                        add("B11", (i, j, k, t), co, "<=", 0.0)
                        co = {s: 1.0, x: -float(n)}
                        for key, val in visited.items():
                            co[key] = co.get(key, 0.0) - val
                        add("B12", (i, j, k, t), co, ">=", -float(n))
                        add("B13", (i, j, k, t), {s: 1.0}, ">=", 0.0)
            else:
                # big-M service-time sequencing (C2); bounds carry (C3)
                speed = dtype.speed
                service = instance.service_time or 0.0
                tau_max = max(instance.distance(i, j) for i in nodes for j in nodes) / speed
                big_m = max(c.time_window[1] for c in instance.customers) + service + tau_max
                for i in nodes:
                    for j in cust:
                        if i == j:
                            continue
                        tau = instance.distance(i, j) / speed
                        x = _vi("x", i, j, k, t)
                        if i == 0:
                            co = {x: big_m, _vi("r", j, k, t): -1.0}
                            add("C2", (i, j, k, t), co, "<=", big_m - tau)
                        else:
                            co = {_vi("r", i, k, t): 1.0, x: big_m,
                                  _vi("r", j, k, t): -1.0}
                            add("C2", (i, j, k, t), co, "<=", big_m - service - tau)
            if dispatch == "required":
                add("dispatch", (k, t), {_vi("x", 0, j, k, t): 1.0 for j in cust}, ">=", 1.0)

        # volume cap (C1): data-driven, per type with a cap set
        if dtype.volume_capacity is not None:
            vols = {}
            for c in instance.customers:
                if c.package_volume is None:
                    raise ValueError("type %d has a volume cap but customer %d has "
                                     "no package volume" % (k, c.id))
                vols[c.id] = c.package_volume
            for t in range(1, dtype.count + 1):
                co = {}
                for i in cust:
                    for j in nodes:
                        co[_vi("x", i, j, k, t)] = vols[i]
                add("C1", (k, t), co, "<=", dtype.volume_capacity)

        # symmetry breaking (B14)-(B16)
        if symmetry_breaking:
            for t in range(1, dtype.count):
                co = {_vi("x", 0, j, k, t): 1.0 for j in cust}
                for j in cust:
                    co[_vi("x", 0, j, k, t + 1)] = -1.0
                add("B14", (k, t), co, ">=", 0.0)
            if use_lex:
                for t in range(1, dtype.count):
                    co = {}
                    for i in cust:
                        co[_vi("y", i, k, t)] = float(2 ** (n - i))
                        co[_vi("y", i, k, t + 1)] = -float(2 ** (n - i))
                    add("B15", (k, t), co, ">=", 0.0)
        if use_lex:
            for t in range(1, dtype.count + 1):
                for i in cust:
                    co = {_vi("y", i, k, t): 1.0}
                    for j in nodes:
                        key = _vi("x", i, j, k, t)
                        co[key] = co.get(key, 0.0) - 1.0
                    add("B16", (i, k, t), co, "=", 0.0)

    return MilpModel(n=n, variables=variables, objective=objective, constraints=cons,
                     symmetry_breaking=symmetry_breaking, time_windows=time_windows,
                     dispatch=dispatch, units=units)


# ---------------------------------------------------------------------------
# LP text export / re-parse

def _fmt(value: float) -> str:
    return "%.12g" % value


def _expr(coeffs: Dict[VariableIndex, float]) -> str:
    parts = []
    for idx in sorted(coeffs):
        v = coeffs[idx]
        sign = "-" if v < 0 else "+"
        parts.append("%s %s %s" % (sign, _fmt(abs(v)), idx.name))
    text = " ".join(parts)
    if text.startswith("+ "):
        text = text[2:]
    return text


def _wrap(line: str, limit: int = 220) -> List[str]:
    if len(line) <= limit:
        return [line]
    out = []
    cur = ""
    for token in line.split(" "):
        if cur and len(cur) + 1 + len(token) > limit:
            out.append(cur)
            cur = " " + token
        else:
            cur = token if not cur else cur + " " + token
    if cur:
        out.append(cur)
    return out


def export_lp(model: MilpModel) -> str:
    """Deterministic LP text: fixed variable order, 12 significant digits."""
    lines = ["\\ green drone routing MILP (n=%d, units=%d)" % (model.n, len(model.units))]
    lines.append("Minimize")
    lines.extend(_wrap(" obj: " + _expr(model.objective)))
    lines.append("Subject To")
    for c in model.constraints:
        sense = {"<=": "<=", ">=": ">=", "=": "="}[c.sense]
        row = " %s: %s %s %s" % (c.name, _expr(c.coeffs), sense, _fmt(c.rhs))
        lines.extend(_wrap(row))
    lines.append("Bounds")
    for v in sorted(model.variables, key=lambda d: d.index):
        if v.binary:
            continue
        lines.append(" %s <= %s <= %s" % (_fmt(v.lower), v.index.name, _fmt(v.upper)))
    lines.append("Binaries")
    binaries = [v.index.name for v in sorted(model.variables, key=lambda d: d.index)
                if v.binary]
    for i in range(0, len(binaries), 8):
        lines.append(" " + " ".join(binaries[i:i + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


@dataclass
class ParsedLp:
    objective: Dict[str, float]
    constraints: List[Tuple[str, Dict[str, float], str, float]]
    bounds: Dict[str, Tuple[float, float]]
    binaries: List[str]


_TOKEN = re.compile(r"(<=|>=|=|\+|-|[A-Za-z][A-Za-z0-9_]*|[0-9.eE+-]+|:)")


def parse_lp(text: str) -> ParsedLp:
    """Re-parse the dialect emitted by export_lp (round-trip checking)."""
    section = None
    obj: Dict[str, float] = {}
    cons: List[Tuple[str, Dict[str, float], str, float]] = []
    bounds: Dict[str, Tuple[float, float]] = {}
    binaries: List[str] = []
    pending: List[str] = []

    def flush(tokens: List[str]) -> None:
        if not tokens:
            return
        assert tokens[1] == ":", "row must start with a name"
        name = tokens[0]
        body = tokens[2:]
        coeffs: Dict[str, float] = {}
        sense = None
        rhs = 0.0
        sign = 1.0
        i = 0
        while i < len(body):
            tok = body[i]
            if tok in ("<=", ">=", "="):
                sense = tok
                rhs = float(body[i + 1]) if body[i + 1] not in ("+", "-") else float(
                    body[i + 2]) * (-1.0 if body[i + 1] == "-" else 1.0)
                break
            if tok == "+":
                sign = 1.0
            elif tok == "-":
                sign = -1.0
            else:
                try:
                    val = float(tok)
                    var = body[i + 1]
                    i += 1
                except ValueError:
                    val = 1.0
                    var = tok
                coeffs[var] = coeffs.get(var, 0.0) + sign * val
                sign = 1.0
            i += 1
        if name == "obj":
            obj.update(coeffs)
        else:
            cons.append((name, coeffs, sense, rhs))

    for raw in text.splitlines():
        line = raw.rstrip()
        if not line or line.startswith("\\"):
            continue
        stripped = line.strip()
        if stripped in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
            flush(pending)
            pending = []
            section = stripped
            continue
        if section in ("Minimize", "Subject To"):
            tokens = _TOKEN.findall(line)
            if len(tokens) > 1 and tokens[1] == ":":
                flush(pending)
                pending = tokens
            else:
                pending.extend(tokens)
        elif section == "Bounds":
            lo, _, name, _, hi = stripped.split(" ")
            bounds[name] = (float(lo), float(hi))
        elif section == "Binaries":
            binaries.extend(stripped.split())
    flush(pending)
    return ParsedLp(objective=obj, constraints=cons, bounds=bounds, binaries=binaries)


# ---------------------------------------------------------------------------
# Solution mapping and constraint evaluation

def solution_to_assignment(solution, model: MilpModel, instance: Instance,
                           fleet: Fleet) -> Dict[VariableIndex, float]:
    """Map a combinatorial solution onto every model variable.

    Unvisited (i, k, t) combinations take the documented free-variable
    conventions (w = self mass, u = 1, everything else 0 / window start).
    Tours are relabeled within each type so the lexicographic symmetry
    rows, when present, hold (units of one type are interchangeable).
    """
    report = check_solution(solution, fleet, instance)
    if not report.feasible:
        raise InfeasibleInput("solution fails feasibility: %r" % (report.violations,))

    assign: Dict[VariableIndex, float] = {}
    for v in model.variables:
        if v.index.family == "w":
            assign[v.index] = v.lower  # self mass
        elif v.index.family == "u":
            assign[v.index] = 1.0
        elif v.index.family == "r":
            assign[v.index] = v.lower  # window start
        else:
            assign[v.index] = 0.0

    by_type: Dict[int, List] = {}
    for tour in solution.tours:
        by_type.setdefault(tour.drone_type, []).append(tour)

    n = model.n
    for dtype in fleet.types:
        tours = by_type.get(dtype.type_id, [])
        tours.sort(key=lambda tr: sum(2 ** (n - i) for i in tr.visits), reverse=True)
        for t, tour in enumerate(tours, start=1):
            k = dtype.type_id
            visits = list(tour.visits)
            nodes_seq = [0] + visits + [0]
            profile = tour_weight_profile(visits, dtype, instance)
            count = float(len(visits))
            for (node, w_mass), nxt in zip(profile.entries, nodes_seq[1:]):
                assign[_vi("x", node, nxt, k, t)] = 1.0
                assign[_vi("z", node, nxt, k, t)] = w_mass
                assign[_vi("w", node, k, t)] = w_mass
                if node != 0 and nxt != 0 and not model.time_windows:
                    assign[_vi("s", node, nxt, k, t)] = count
            if not model.time_windows:
                for pos, c in enumerate(visits, start=1):
                    assign[_vi("u", c, k, t)] = float(pos)
            else:
                for c, start in zip(visits, service_start_times(visits, dtype, instance)):
                    assign[_vi("r", c, k, t)] = start
            if model.symmetry_breaking and model.has_var(_vi("y", visits[0], k, t)):
                for c in visits:
                    assign[_vi("y", c, k, t)] = 1.0
    return assign


def evaluate_assignment(model: MilpModel, assignment: Dict[VariableIndex, float]):
    """Plug values into every row: (objective value, [(row name, slack)])."""
    obj = 0.0
    for idx, coef in model.objective.items():
        if idx not in assignment:
            raise MissingVariable(idx.name)
        obj += coef * assignment[idx]
    violations: List[Tuple[str, float]] = []
    for c in model.constraints:
        lhs = 0.0
        for idx, coef in c.coeffs.items():
            if idx not in assignment:
                raise MissingVariable(idx.name)
            lhs += coef * assignment[idx]
        slack = lhs - c.rhs
        if c.sense == "<=" and slack > EVAL_TOL:
            violations.append((c.name, slack))
        elif c.sense == ">=" and slack < -EVAL_TOL:
            violations.append((c.name, slack))
        elif c.sense == "=" and abs(slack) > EVAL_TOL:
            violations.append((c.name, slack))
    return obj, violations


def assignment_to_dict(assignment: Dict[VariableIndex, float]) -> dict:
    """Debug dump: active arcs as index quadruples, other families by name."""
    out = {"x": [], "w": {}, "u": {}, "z": {}, "s": {}, "y": {}, "r": {}}
    for idx, val in sorted(assignment.items()):
        if idx.family == "x":
            if val > 0.5:
                out["x"].append(list(idx.indices))
        elif val != 0.0:
            out[idx.family][idx.name] = val
    return out

"""Command-line interface: solve, reproduce, compare, export-milp, geometry, gen.

Exit codes: 0 ok/optimal, 2 time-limit incumbent, 3 infeasible,
4 reproduction mismatch, 1 usage or I/O failure.
"""

import argparse
import csv
import json
import math
import sys
from importlib import resources
from typing import Dict, List, Optional, Tuple

from . import milp, solomon
from .energy import (crossover_distance, fleet_energy_gap, tour_distance,
                     tour_energy)
from .model import (Customer, DroneType, Fleet, Instance, builtin_fleet,
                    builtin_instance, example1_instance, example2_instance,
                    example_drone, generate_instance, instance_to_dict,
                    load_fleet, load_instance, make_instance, save_instance,
                    LARGE_DRONE, SMALL_DRONE)
from .solver import (Infeasible, SolveOptions, SolveResult,
                     evaluate_fixed_routes, solve)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TIME_LIMIT = 2
EXIT_INFEASIBLE = 3
EXIT_MISMATCH = 4

# Reference totals the experiments are expected to land on. The benchmark
# coordinates are published at 2-decimal precision, so reproduction is
# checked to 0.1% relative (or 0.01 absolute, whichever is looser).
REFERENCE = {
    "example1": {"D1": 4.0, "E1": 128.0, "D2": 2 + 2 * math.sqrt(2), "E2": 77 + 33 * math.sqrt(2)},
    "example2": {"joint": 102.0, "split": 100.0},
    "baseline": 2159.24,
    "large-only": 2460.74,
    "table4": {10: 2159.24, 11: 2206.04, 12: 2534.44, 13: 2733.73, 14: 2749.91,
               15: 2933.05, 16: 3111.72, 17: 3202.29, 18: 3284.64},
    "solomon_summary": "reference summary: 20/30 instances with savings, mean 2.17%, max 5.97%",
    "weights_ratio": 0.155,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("error: %s\n" % message)
        raise SystemExit(EXIT_USAGE)


def _close(value: float, reference: float, abs_tol: float = 0.01,
           rel_tol: float = 1e-3) -> bool:
    return abs(value - reference) <= max(abs_tol, rel_tol * abs(reference))


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    with open(path) as f:
        return json.load(f)


def _resolve_instance(args) -> Instance:
    if getattr(args, "builtin", None):
        return builtin_instance(args.builtin)
    if getattr(args, "instance", None):
        return load_instance(args.instance)
    raise ValueError("no instance given: pass --instance or --builtin")


def _resolve_fleet(args) -> Fleet:
    if getattr(args, "table3", False):
        return builtin_fleet("table3")
    name = getattr(args, "fleet", None)
    if name in ("table3", "large-only", "small-only"):
        return builtin_fleet(name)
    if name:
        return load_fleet(name)
    return builtin_fleet("table3")


def _options(args, config: dict, **overrides) -> SolveOptions:
    def pick(flag, key, default):
        if flag is not None:
            return flag
        return config.get(key, default)

    objective = overrides.pop("objective", None) or pick(
        getattr(args, "objective", None), "objective", "min_energy")
    if objective in ("energy", "distance"):
        objective = "min_" + objective
    kwargs = dict(
        objective=objective,
        tie_break=pick(getattr(args, "tie_break", None), "tie_break", "min_energy"),
        dispatch=pick(getattr(args, "dispatch", None), "dispatch", "required"),
        time_limit_s=pick(getattr(args, "time_limit", None), "time_limit_s", 600.0),
        thread_count=pick(getattr(args, "threads", None), "threads", None),
        enable_volume=bool(getattr(args, "volume", False)),
        enable_time_windows=bool(getattr(args, "time_windows", False)),
    )
    kwargs.update(overrides)
    return SolveOptions(**kwargs)


def _print_solution(result: SolveResult) -> None:
    sol = result.best
    if sol is None:
        print("no solution found within the time limit")
        return
    for t in sol.tours:
        route = " -> ".join(["0"] + [str(c) for c in t.visits] + ["0"])
        print("  drone type %d, unit %d: %s   energy %.4f Wh, distance %.4f km"
              % (t.drone_type, t.unit_index, route, t.energy, t.distance))
    print("total energy  : %.4f Wh" % sol.total_energy)
    print("total distance: %.4f km" % sol.total_distance)
    print("status        : %s (gap %.4g, %d nodes, %.2fs)"
          % ("optimal" if result.proven_optimal else "incumbent",
             result.relative_gap, result.nodes_explored, result.wall_time_s))


def _write_json(path: Optional[str], payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w") as f:
            f.write(text)
    else:
        print(text, end="")


def cmd_solve(args) -> int:
    config = _load_config(args.config)
    instance = _resolve_instance(args)
    fleet = _resolve_fleet(args)
    opts = _options(args, config)
    try:
        result = solve(instance, fleet, opts)
    except Infeasible as exc:
        print("infeasible: %s" % exc)
        return EXIT_INFEASIBLE
    _print_solution(result)
    if args.out:
        _write_json(args.out, result.to_dict())
    if result.best is None or not result.proven_optimal:
        return EXIT_TIME_LIMIT
    return EXIT_OK


def _rescaled_masses(values: List[float], lo: float, hi: float) -> List[float]:
    mn, mx = min(values), max(values)
    return [lo + (v - mn) * (hi - lo) / (mx - mn) for v in values]


def _weights_instance(scenario: str) -> Instance:
    base = builtin_instance("appendix-d:10")
    ranges = {"light": (0.5, 1.0), "heavy": (1.5, 2.0), "dispersed": (0.25, 3.0)}
    lo, hi = ranges[scenario]
    masses = _rescaled_masses([c.package_mass for c in base.customers], lo, hi)
    customers = [Customer(id=c.id, position=c.position, package_mass=m)
                 for c, m in zip(base.customers, masses)]
    return make_instance(base.depot_position, customers)


def _area_instance(scenario: str) -> Instance:
    # proportional scaling about the depot-centered baseline area (10x10 km);
    # min-max stretching onto the rectangle corners would push every border
    # customer out of small-drone range and void the scenario
    base = builtin_instance("appendix-d:10")
    dims = {"small": (5.0, 5.0), "large": (15.0, 15.0), "rect": (5.0, 10.0)}
    w, h = dims[scenario]
    customers = [Customer(id=c.id,
                          position=(c.position[0] * w / 10.0,
                                    c.position[1] * h / 10.0),
                          package_mass=c.package_mass)
                 for c in base.customers]
    return make_instance((0.0, 0.0), customers)


def _sweep_fleet(el2: float, ef2: float) -> Fleet:
    large = DroneType(type_id=2, self_mass=10.0, takeoff_coeff=el2, flight_coeff=ef2,
                      max_total_mass=20.0, energy_capacity=1500.0, count=2)
    return Fleet(types=(SMALL_DRONE, large))


def cmd_reproduce(args) -> int:
    config = _load_config(args.config)
    target, _, arg = args.target.partition(":")
    mismatches: List[str] = []

    def check(label: str, value: float, reference: float) -> None:
        ok = _close(value, reference)
        print("  %-28s computed %12.4f   reference %10.4f   %s"
              % (label, value, reference, "ok" if ok else "MISMATCH"))
        if not ok:
            mismatches.append(label)

    if target == "example1":
        inst = example1_instance()
        drone = example_drone()
        ref = REFERENCE["example1"]
        check("route 0-1-2-3-0 distance", tour_distance((1, 2, 3), inst), ref["D1"])
        check("route 0-1-2-3-0 energy", tour_energy((1, 2, 3), drone, inst), ref["E1"])
        check("route 0-2-1-3-0 distance", tour_distance((2, 1, 3), inst), ref["D2"])
        check("route 0-2-1-3-0 energy", tour_energy((2, 1, 3), drone, inst), ref["E2"])
    elif target == "example2":
        inst = example2_instance()
        ref = REFERENCE["example2"]
        one = solve(inst, Fleet(types=(example_drone(1),)), _options(args, config))
        two = solve(inst, Fleet(types=(example_drone(2),)), _options(args, config))
        check("single drone (joint tour)", one.best.total_energy, ref["joint"])
        check("two drones (split tours)", two.best.total_energy, ref["split"])
    elif target == "example3":
        small, large = SMALL_DRONE, LARGE_DRONE
        ok = True
        for m in (0.0, 1.0, 2.0, 5.0):
            gaps = [fleet_energy_gap(large, small, m, d) for d in (0.0, 1.0, 2.0)]
            second = gaps[2] - 2 * gaps[1] + gaps[0]
            ok &= abs(second) <= 1e-9
            at_zero = (large.takeoff_coeff * (2 * large.self_mass + m)
                       - small.takeoff_coeff * (2 * small.self_mass + m))
            ok &= abs(fleet_energy_gap(large, small, m, 0.0) - at_zero) <= 1e-12
        cross = crossover_distance(large, small, 2.0)
        print("  gap is affine in distance and mass:", "ok" if ok else "MISMATCH")
        print("  crossover at payload 2 kg: intercept %.4f slope %.4f -> %s"
              % (cross.intercept, cross.slope,
                 "none (small drone always wins the round trip)"
                 if cross.distance is None else "%.4f km" % cross.distance))
        if not ok:
            mismatches.append("example3 affine structure")
        if not (cross.distance is None and cross.intercept > 0 and cross.slope > 0):
            mismatches.append("example3 crossover sign")
    elif target in ("baseline", "large-only"):
        fleet = builtin_fleet("table3" if target == "baseline" else "large-only")
        result = solve(builtin_instance("appendix-d:10"), fleet, _options(args, config))
        _print_solution(result)
        check("total energy", result.best.total_energy, REFERENCE[target])
    elif target == "table4":
        nmax = int(arg) if arg else 13
        fleet = builtin_fleet("table3")
        for n in range(10, nmax + 1):
            result = solve(builtin_instance("appendix-d:%d" % n), fleet,
                           _options(args, config))
            if n <= 17:
                check("n=%d total energy" % n, result.best.total_energy,
                      REFERENCE["table4"][n])
            else:
                print("  n=%d total energy %.4f (reference %.2f; incumbent "
                      "accepted, gap %.4g)" % (n, result.best.total_energy,
                                               REFERENCE["table4"][n], result.relative_gap))
    elif target == "weights":
        scenarios = ["light", "heavy", "dispersed"] if arg in ("", "all") else [arg]
        totals: Dict[str, float] = {}
        fleet = builtin_fleet("table3")
        base = solve(builtin_instance("appendix-d:10"), fleet, _options(args, config))
        print("  %-10s total energy %12.4f" % ("baseline", base.best.total_energy))
        for sc in scenarios:
            res = solve(_weights_instance(sc), fleet, _options(args, config))
            totals[sc] = res.best.total_energy
            print("  %-10s total energy %12.4f" % (sc, totals[sc]))
        if "light" in totals and "heavy" in totals:
            ratio = totals["heavy"] / totals["light"] - 1.0
            ok = 0.10 <= ratio <= 0.20
            print("  heavy vs light: %+.2f%% (reference +%.1f%%, accepted band "
                  "10-20%%) %s" % (100 * ratio, 100 * REFERENCE["weights_ratio"],
                                   "ok" if ok else "MISMATCH"))
            if not ok:
                mismatches.append("weights ratio")
    elif target == "area":
        scenarios = ["small", "large", "rect"] if arg in ("", "all") else [arg]
        fleet = builtin_fleet("table3")
        for sc in scenarios:
            res = solve(_area_instance(sc), fleet, _options(args, config))
            print("  %-6s area: total energy %12.4f, %d tours"
                  % (sc, res.best.total_energy, len(res.best.tours)))
    elif target == "params-sweep":
        fleet = builtin_fleet("table3")
        baseline = solve(builtin_instance("appendix-d:10"), fleet, _options(args, config))
        base_sig = baseline.best.customer_sets()
        changed = set()
        for el2 in (0.5, 1.0, 2.5):
            for ef2 in (4.0, 5.0, 6.0):
                res = solve(builtin_instance("appendix-d:10"), _sweep_fleet(el2, ef2),
                            _options(args, config))
                differs = res.best.customer_sets() != base_sig
                if differs:
                    changed.add((el2, ef2))
                print("  e_l2=%.1f e_f2=%.1f: total %10.4f  routes %s"
                      % (el2, ef2, res.best.total_energy,
                         "changed" if differs else "as baseline"))
        for cell in ((0.5, 4.0), (0.5, 5.0), (1.0, 4.0)):
            if cell not in changed:
                mismatches.append("sweep cell %r should change routes" % (cell,))
    else:
        print("unknown reproduce target %r" % args.target, file=sys.stderr)
        return EXIT_USAGE

    if mismatches:
        print("MISMATCH in: %s" % ", ".join(mismatches))
        return EXIT_MISMATCH
    print("all reproduced values within tolerance")
    return EXIT_OK


def _solomon_text(source: str) -> str:
    if source in ("c101", "r101", "rc101"):
        return (resources.files("gdrp.data") / ("%s.txt" % source)).read_text()
    with open(source) as f:
        return f.read()


def _parse_subsets(spec: str) -> List[int]:
    out: List[int] = []
    for part in spec.split(","):
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def cmd_compare(args) -> int:
    config = _load_config(args.config)
    fleet = _resolve_fleet(args)
    jobs: List[Tuple[str, Instance]] = []
    for source in args.solomon or []:
        nodes = solomon.parse_solomon(_solomon_text(source))
        label = source.rsplit("/", 1)[-1].split(".")[0].upper()
        for s in _parse_subsets(args.subsets):
            jobs.append(("%s-%d" % (label, s),
                         solomon.rescale_solomon(nodes, subset_index=s)))
    for path in args.instance or []:
        jobs.append((path.rsplit("/", 1)[-1], load_instance(path)))
    if not jobs:
        print("nothing to compare: pass --solomon and/or --instance", file=sys.stderr)
        return EXIT_USAGE

    tie_break = args.tie_break or config.get("tie_break", "lexicographic")
    rows = []
    for name, inst in jobs:
        try:
            dist_opts = _options(args, config, objective="min_distance",
                                 tie_break=tie_break)
            energy_opts = _options(args, config, objective="min_energy",
                                   tie_break=tie_break)
            r_dist = solve(inst, fleet, dist_opts)
            e_dist, _, _ = evaluate_fixed_routes(r_dist.best, fleet, inst)
            r_energy = solve(inst, fleet, energy_opts)
            e_green = r_energy.best.total_energy
            saving = (e_dist - e_green) / e_dist * 100.0 if e_dist > 0 else 0.0
            rows.append({"instance": name, "min_distance_energy": "%.4f" % e_dist,
                         "min_energy_energy": "%.4f" % e_green,
                         "saving_pct": "%.4f" % saving, "error": ""})
            print("  %-10s E_dist %10.2f  E_green %10.2f  saving %6.2f%%"
                  % (name, e_dist, e_green, saving))
        except Exception as exc:  # per-instance failures become CSV rows
            rows.append({"instance": name, "min_distance_energy": "",
                         "min_energy_energy": "", "saving_pct": "",
                         "error": "%s: %s" % (type(exc).__name__, exc)})
            print("  %-10s FAILED %s" % (name, exc))

    savings = [float(r["saving_pct"]) for r in rows if r["saving_pct"]]
    positive = [s for s in savings if s > 1e-9]
    if savings:
        print("instances: %d, with savings: %d (%.0f%%), mean saving among "
              "savers: %.2f%%, max saving: %.2f%%"
              % (len(savings), len(positive),
                 100.0 * len(positive) / len(savings),
                 sum(positive) / len(positive) if positive else 0.0,
                 max(savings) if savings else 0.0))
    print(REFERENCE["solomon_summary"])

    if args.out:
        with open(args.out, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=["instance", "min_distance_energy",
                                                   "min_energy_energy", "saving_pct",
                                                   "error"])
            writer.writeheader()
            writer.writerows(rows)
    return EXIT_OK


def cmd_export_milp(args) -> int:
    config = _load_config(args.config)
    instance = _resolve_instance(args)
    fleet = _resolve_fleet(args)
    try:
        model = milp.build_model(instance, fleet,
                                 symmetry_breaking=args.symmetry != "off",
                                 time_windows=bool(args.time_windows),
                                 dispatch=args.dispatch or "required")
        text = milp.export_lp(model)
    except Exception as exc:
        print("model build failed: %s" % exc, file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        print(text, end="")
    counts = model.counts_by_tag()
    print("variables: %d   constraints: %d" % (len(model.variables),
                                               len(model.constraints)), file=sys.stderr)
    for tag in sorted(counts):
        print("  rows %-9s %6d" % (tag, counts[tag]), file=sys.stderr)
    return EXIT_OK


def cmd_geometry(args) -> int:
    instance = load_instance(args.instance)
    with open(args.solution) as f:
        sol = json.load(f)
    tours_out = []
    for t in sol.get("tours", []):
        pts = [list(instance.depot_position)]
        for c in t["visits"]:
            if not (1 <= c <= instance.n):
                print("solution references customer %d outside the instance" % c,
                      file=sys.stderr)
                return EXIT_USAGE
            pts.append(list(instance.position(c)))
        pts.append(list(instance.depot_position))
        tours_out.append({"type": t["type"], "unit": t["unit"], "polyline": pts})
    payload = {
        "tours": tours_out,
        "nodes": [{"id": c.id, "pos": list(c.position), "mass": c.package_mass}
                  for c in instance.customers],
        "depot": list(instance.depot_position),
    }
    _write_json(args.out, payload)
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        w, _, h = args.area.partition("x")
        area = (float(w), float(h or w))
    except ValueError:
        print("bad --area, expected WIDTHxHEIGHT", file=sys.stderr)
        return EXIT_USAGE
    inst = generate_instance(args.n, area=area,
                             mass_range=(args.mass_min, args.mass_max),
                             seed=args.seed)
    if args.out:
        save_instance(inst, args.out)
    else:
        _write_json(None, instance_to_dict(inst))
    return EXIT_OK


def _add_common(p, instance_flags=True):
    p.add_argument("--config", help="optional JSON config file")
    if instance_flags:
        p.add_argument("--instance", help="instance JSON path")
        p.add_argument("--builtin", help="builtin instance, e.g. appendix-d:10")
        p.add_argument("--fleet", help="fleet JSON path or table3|large-only|small-only")
        p.add_argument("--table3", action="store_true", help="use the builtin reference fleet")
    p.add_argument("--time-limit", type=float, dest="time_limit")
    p.add_argument("--threads", type=int)
    p.add_argument("--dispatch", choices=["required", "optional"])


def main(argv=None) -> int:
    parser = _Parser(prog="gdrp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance")
    _add_common(p)
    p.add_argument("--objective", choices=["energy", "distance", "min_energy", "min_distance"])
    p.add_argument("--tie-break", dest="tie_break", choices=["min_energy", "lexicographic"])
    p.add_argument("--volume", action="store_true")
    p.add_argument("--time-windows", action="store_true", dest="time_windows")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("reproduce", help="run a named experiment and check reference values")
    p.add_argument("target", help="example1|example2|example3|baseline|large-only|"
                                  "table4:<nmax>|weights:<scenario>|area:<scenario>|params-sweep")
    _add_common(p, instance_flags=False)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("compare", help="min-distance vs min-energy comparison table")
    _add_common(p, instance_flags=False)
    p.add_argument("--solomon", action="append",
                   help="benchmark source: c101|r101|rc101 or a file path (repeatable)")
    p.add_argument("--subsets", default="1-10", help="subset list, e.g. 1-10 or 1,3")
    p.add_argument("--instance", action="append", help="instance JSON path (repeatable)")
    p.add_argument("--fleet", help="fleet JSON path or table3|large-only|small-only")
    p.add_argument("--table3", action="store_true")
    p.add_argument("--tie-break", dest="tie_break",
                   choices=["min_energy", "lexicographic"])
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("export-milp", help="write the linearized model as LP text")
    _add_common(p)
    p.add_argument("--symmetry", choices=["on", "off"], default="on")
    p.add_argument("--time-windows", action="store_true", dest="time_windows")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_milp)

    p = sub.add_parser("geometry", help="emit plottable per-tour polylines")
    p.add_argument("--solution", required=True, help="solution JSON path")
    p.add_argument("--instance", required=True, help="instance JSON path")
    p.add_argument("--out")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--area", default="10x10")
    p.add_argument("--mass-min", type=float, default=0.5, dest="mass_min")
    p.add_argument("--mass-max", type=float, default=2.0, dest="mass_max")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Infeasible as exc:
        print("infeasible: %s" % exc, file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

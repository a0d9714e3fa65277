#!/usr/bin/env python3
"""Compare the compiled search kernel against the pure-Python twin.

Runs the bundled benchmark instance at increasing sizes with both engines
and reports wall time, explored nodes and the objective (which must match
exactly — the twins perform identical floating-point work).

Usage: python benchmarks/bench_engines.py [--nmax 15]
"""

import argparse
import os
import time

from gdrp import SolveOptions, baseline_instance, builtin_fleet, solve
from gdrp.solver import compiled_available


def run(n, fleet, engine):
    os.environ["GDRP_PURE_PYTHON"] = "1" if engine == "pure" else "0"
    t0 = time.perf_counter()
    res = solve(baseline_instance(n), fleet, SolveOptions(time_limit_s=3600))
    dt = time.perf_counter() - t0
    return dt, res


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--nmax", type=int, default=14)
    args = parser.parse_args()

    if not compiled_available():
        print("compiled kernel not available; showing pure engine only")
    fleet = builtin_fleet("table3")
    print("%4s %14s %12s %10s %12s %10s %9s" %
          ("n", "objective_Wh", "pure_s", "nodes", "compiled_s", "nodes", "speedup"))
    for n in range(10, args.nmax + 1):
        tp, rp = run(n, fleet, "pure")
        if compiled_available():
            tc, rc = run(n, fleet, "compiled")
            assert rc.best.total_energy == rp.best.total_energy, "engines diverged"
            assert rc.nodes_explored == rp.nodes_explored, "search trees diverged"
            print("%4d %14.4f %12.3f %10d %12.3f %10d %8.1fx" %
                  (n, rp.best.total_energy, tp, rp.nodes_explored,
                   tc, rc.nodes_explored, tp / tc if tc > 0 else float("inf")))
        else:
            print("%4d %14.4f %12.3f %10d" %
                  (n, rp.best.total_energy, tp, rp.nodes_explored))
    os.environ.pop("GDRP_PURE_PYTHON", None)


if __name__ == "__main__":
    main()

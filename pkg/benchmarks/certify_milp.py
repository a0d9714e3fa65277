#!/usr/bin/env python3
"""Certify the exported MILP against an independent solver (HiGHS).

Parses the LP text produced by export_lp back into matrix form, hands it
to scipy.optimize.milp, and compares the optimum with the combinatorial
solver. Manual check, not part of the test suite (the library itself never
solves MILPs).

Usage: python benchmarks/certify_milp.py [--n 10] [--dispatch required]
"""

import argparse

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import lil_matrix

from gdrp import baseline_instance, builtin_fleet, solve, SolveOptions
from gdrp.milp import build_model, export_lp, parse_lp


def solve_lp_text(text):
    parsed = parse_lp(text)
    names = sorted({v for _, coeffs, _, _ in parsed.constraints for v in coeffs}
                   | set(parsed.objective) | set(parsed.bounds) | set(parsed.binaries))
    col = {name: i for i, name in enumerate(names)}
    nvar = len(names)

    c = np.zeros(nvar)
    for name, coef in parsed.objective.items():
        c[col[name]] = coef

    lower = np.full(nvar, 0.0)
    upper = np.full(nvar, np.inf)
    integrality = np.zeros(nvar)
    for name, (lo, hi) in parsed.bounds.items():
        lower[col[name]], upper[col[name]] = lo, hi
    for name in parsed.binaries:
        lower[col[name]], upper[col[name]] = 0.0, 1.0
        integrality[col[name]] = 1

    a = lil_matrix((len(parsed.constraints), nvar))
    lo = np.empty(len(parsed.constraints))
    hi = np.empty(len(parsed.constraints))
    for r, (_, coeffs, sense, rhs) in enumerate(parsed.constraints):
        for name, coef in coeffs.items():
            a[r, col[name]] = coef
        if sense == "<=":
            lo[r], hi[r] = -np.inf, rhs
        elif sense == ">=":
            lo[r], hi[r] = rhs, np.inf
        else:
            lo[r], hi[r] = rhs, rhs

    res = milp(c=c, constraints=LinearConstraint(a.tocsr(), lo, hi),
               bounds=Bounds(lower, upper), integrality=integrality)
    if not res.success:
        raise RuntimeError("HiGHS failed: %s" % res.message)
    return res.fun


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=10)
    parser.add_argument("--dispatch", choices=["required", "optional"],
                        default="required")
    args = parser.parse_args()

    inst = baseline_instance(args.n)
    fleet = builtin_fleet("table3")
    model = build_model(inst, fleet, symmetry_breaking=True, dispatch=args.dispatch)
    text = export_lp(model)
    print("model: n=%d, %d variables, %d rows; solving with HiGHS ..."
          % (args.n, len(model.variables), len(model.constraints)))
    external = solve_lp_text(text)
    own = solve(inst, fleet, SolveOptions(dispatch=args.dispatch)).best.total_energy
    print("HiGHS optimum   : %.6f Wh" % external)
    print("gdrp optimum    : %.6f Wh" % own)
    print("difference      : %+.2e" % (external - own))
    assert abs(external - own) <= 1e-4 * max(1.0, abs(own)), "certification FAILED"
    print("certified: the exported model and the combinatorial solver agree")


if __name__ == "__main__":
    main()

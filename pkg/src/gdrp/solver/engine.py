"""Kernel selection: compiled extension when available, pure Python otherwise.

Set GDRP_PURE_PYTHON=1 to force the fallback (the benchmark uses this to
compare engines). Both kernels perform identical floating-point work, so
results match exactly.
"""

import os

import numpy as np

from . import _kernel

try:
    from .. import _speedups as _compiled
except ImportError:  # extension not built; pure twin takes over
    _compiled = None


def _force_pure() -> bool:
    return os.environ.get("GDRP_PURE_PYTHON", "") not in ("", "0")


def compiled_available() -> bool:
    return _compiled is not None


def active_engine() -> str:
    return "pure" if (_compiled is None or _force_pure()) else "compiled"


def energy_cost_table(n, coef, m0, sub_mass, feasible, energy_cap):
    if active_engine() == "compiled":
        return _compiled.energy_cost_table(
            n, np.asarray(coef, dtype=np.float64), float(m0),
            np.asarray(sub_mass, dtype=np.float64),
            np.frombuffer(bytes(feasible), dtype=np.uint8), float(energy_cap))
    return _kernel.energy_cost_table(n, coef, m0, sub_mass, feasible, energy_cap)


def run_bb(n, h, cost_tables, side_tables, side_budget, marg_suffix,
           side_marg_suffix, marg_ck, perm, required, use_pruning,
           time_limit_s, seed_value, seed_masks):
    if active_engine() == "compiled":
        k = len(h)
        size = 1 << n
        cost = np.empty((k, size), dtype=np.float64)
        for i in range(k):
            cost[i, :] = cost_tables[i]
        if side_tables is not None:
            side = np.empty((k, size), dtype=np.float64)
            for i in range(k):
                side[i, :] = side_tables[i]
        else:
            side = np.empty((0, 0), dtype=np.float64)
        if marg_ck is not None:
            mck = np.empty((k, n), dtype=np.float64)
            for i in range(k):
                mck[i, :] = marg_ck[i]
        else:
            mck = np.empty((0, 0), dtype=np.float64)
        value, masks, nodes, proven, lb = _compiled.run_bb(
            n, np.asarray(h, dtype=np.int32), cost,
            side_tables is not None, side, float(side_budget),
            np.asarray(marg_suffix, dtype=np.float64),
            np.asarray(side_marg_suffix, dtype=np.float64),
            marg_ck is not None, mck,
            np.asarray(perm, dtype=np.int32), bool(required), bool(use_pruning),
            float(time_limit_s),
            float(seed_value) if seed_value is not None else float("inf"),
            np.asarray(seed_masks, dtype=np.int64) if seed_masks is not None
            else np.empty(0, dtype=np.int64))
        return _kernel.SearchResult(value, list(masks) if masks is not None else None,
                                    nodes, proven, lb)
    return _kernel.run_bb(n, h, cost_tables, side_tables, side_budget,
                          marg_suffix, side_marg_suffix, marg_ck, perm,
                          required, use_pruning, time_limit_s, seed_value,
                          seed_masks)

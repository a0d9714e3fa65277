"""Pure-Python search kernel: subset tour DP + branch-and-bound.

Twin of the compiled gdrp._speedups module; both implement the same
operations in the same floating-point order so results are identical.
Customers are bits 0..n-1 (bit i = customer id i+1); node 0 is the depot.
"""

import math
from time import monotonic

INF = math.inf
FEAS_EPS = 1e-9
TIME_CHECK_MASK = 0xFFF


def subset_sums(values):
    """sums[S] = sum of values over the bits of S."""
    n = len(values)
    out = [0.0] * (1 << n)
    for s in range(1, 1 << n):
        low = s & -s
        out[s] = out[s ^ low] + values[low.bit_length() - 1]
    return out


def feasible_subsets(n, m0, weight_cap, sub_mass, sub_vol=None, volume_cap=None):
    """Byte map of weight/volume-admissible subsets (downward closed)."""
    size = 1 << n
    out = bytearray(size)
    use_vol = sub_vol is not None and volume_cap is not None
    for s in range(size):
        if m0 + sub_mass[s] <= weight_cap + FEAS_EPS:
            if not use_vol or sub_vol[s] <= volume_cap + FEAS_EPS:
                out[s] = 1
    return out


def energy_cost_table(n, coef, m0, sub_mass, feasible, energy_cap):
    """Optimal tour energy per customer subset; inf where infeasible.

    coef is the flattened (n+1)x(n+1) per-unit-mass leg cost e_l + e_f*d.
    The tail table g[(S, f)] (cost from departing customer f, with the
    rest of S still to serve, through the return leg) is shared across
    supersets, so the whole table costs O(2^n n^2).
    """
    size = 1 << n
    stride = n + 1
    g = [INF] * (size * n)
    opt = [INF] * size
    opt[0] = 0.0
    for s in range(1, size):
        if not feasible[s]:
            continue
        launch = m0 + sub_mass[s]
        best_s = INF
        for f in range(n):
            if not (s >> f) & 1:
                continue
            rest = s & ~(1 << f)
            if rest == 0:
                tail = coef[(f + 1) * stride] * m0
            else:
                w = m0 + sub_mass[rest]
                tail = INF
                row = (f + 1) * stride
                base = rest * n
                for f2 in range(n):
                    if (rest >> f2) & 1:
                        v = coef[row + f2 + 1] * w + g[base + f2]
                        if v < tail:
                            tail = v
            g[s * n + f] = tail
            v = coef[f + 1] * launch + tail
            if v < best_s:
                best_s = v
        if best_s <= energy_cap + FEAS_EPS:
            opt[s] = best_s
    return opt


def distance_cost_table(n, dist, coef, m0, sub_mass, feasible, energy_cap):
    """Per subset: (min tour distance over energy-feasible orders,
    min energy among orders achieving that distance); (inf, inf) if none.

    Keeps a Pareto frontier of (distance, energy) per tail state because
    the distance-optimal order may violate the energy cap while a slightly
    longer order does not.
    """
    size = 1 << n
    stride = n + 1
    fr = [None] * (size * n)
    opt_d = [INF] * size
    opt_e = [INF] * size
    opt_d[0] = 0.0
    opt_e[0] = 0.0
    for s in range(1, size):
        if not feasible[s]:
            continue
        launch = m0 + sub_mass[s]
        cand = []
        for f in range(n):
            if not (s >> f) & 1:
                continue
            rest = s & ~(1 << f)
            if rest == 0:
                pts = [(dist[(f + 1) * stride], coef[(f + 1) * stride] * m0)]
            else:
                w = m0 + sub_mass[rest]
                drow = (f + 1) * stride
                raw = []
                for f2 in range(n):
                    if (rest >> f2) & 1:
                        leg_d = dist[drow + f2 + 1]
                        leg_e = coef[drow + f2 + 1] * w
                        for d2, e2 in fr[rest * n + f2]:
                            e = leg_e + e2
                            if e <= energy_cap + FEAS_EPS:
                                raw.append((leg_d + d2, e))
                pts = _pareto(raw)
            fr[s * n + f] = pts
            for d2, e2 in pts:
                e = coef[f + 1] * launch + e2
                if e <= energy_cap + FEAS_EPS:
                    cand.append((dist[f + 1] + d2, e))
        if cand:
            dstar = min(d for d, _ in cand)
            opt_d[s] = dstar
            opt_e[s] = min(e for d, e in cand if d <= dstar + FEAS_EPS)
    return opt_d, opt_e


def _pareto(points):
    """Non-dominated (distance, energy) points, distance ascending."""
    if not points:
        return []
    points.sort()
    out = []
    best_e = INF
    for d, e in points:
        if e < best_e - 1e-15:
            out.append((d, e))
            best_e = e
    return out


class SearchResult:
    __slots__ = ("value", "masks", "nodes", "proven", "lower_bound")

    def __init__(self, value, masks, nodes, proven, lower_bound):
        self.value = value
        self.masks = masks
        self.nodes = nodes
        self.proven = proven
        self.lower_bound = lower_bound


def run_bb(n, h, cost_tables, side_tables, side_budget,
           marg_suffix, side_marg_suffix, marg_ck, perm,
           required, use_pruning, time_limit_s, seed_value, seed_masks):
    """Depth-first branch and bound over customer-to-unit assignments.

    Units of one type are interchangeable: a customer may only open the
    lowest unused unit of a type. cost_tables[k][mask] gives the exact
    optimal tour cost of a unit subset; marg_suffix[d] lower-bounds the
    contribution of customers perm[d:] not yet assigned. When marg_ck is
    given (non-metric matrices) the bound is the purely additive
    per-customer form instead of the partial-tour-exact form.
    side_tables/side_budget constrain a secondary per-tour metric
    (used by the distance-then-energy tie-break pass).
    """
    num_units = sum(h)
    k_count = len(h)
    base = [0] * k_count
    for k in range(1, k_count):
        base[k] = base[k - 1] + h[k - 1]

    unit_mask = [0] * num_units
    unit_cost = [0.0] * num_units
    unit_side = [0.0] * num_units
    opened = [0] * k_count
    additive = marg_ck is not None

    state = {
        "best_value": seed_value if seed_value is not None else INF,
        "best_masks": list(seed_masks) if seed_masks is not None else None,
        "nodes": 0,
        "aborted": False,
        "lb_open": INF,
        "sum_cost": 0.0,
        "sum_side": 0.0,
        "sum_marg": 0.0,
        "unopened": num_units,
    }
    deadline = monotonic() + time_limit_s
    has_side = side_tables is not None

    def descend(depth):
        if depth == n:
            value = state["sum_cost"]
            if value < state["best_value"]:
                state["best_value"] = value
                state["best_masks"] = list(unit_mask)
            return
        c = perm[depth]
        bit = 1 << c
        best_value = state["best_value"]
        remaining_after = n - depth - 1
        cand = []
        for k in range(k_count):
            top = opened[k] + 1 if opened[k] < h[k] else opened[k]
            table = cost_tables[k]
            for local in range(top):
                u = base[k] + local
                old_mask = unit_mask[u]
                new_cost = table[old_mask | bit]
                if new_cost == INF:
                    continue
                opens = 1 if old_mask == 0 else 0
                if required and remaining_after < state["unopened"] - opens:
                    continue
                dside = 0.0
                if has_side:
                    nside = side_tables[k][old_mask | bit]
                    if nside == INF:
                        continue
                    dside = nside - unit_side[u]
                    if (state["sum_side"] + dside + side_marg_suffix[depth + 1]
                            > side_budget + FEAS_EPS):
                        continue
                dcost = new_cost - unit_cost[u]
                if additive:
                    bound = state["sum_marg"] + marg_ck[k][c] + marg_suffix[depth + 1]
                else:
                    bound = state["sum_cost"] + dcost + marg_suffix[depth + 1]
                if use_pruning and bound >= best_value:
                    continue
                cand.append((bound, u, k, dcost, dside, new_cost, opens))
        cand.sort(key=lambda t: (t[0], t[1]))
        for idx, (bound, u, k, dcost, dside, new_cost, opens) in enumerate(cand):
            if state["aborted"]:
                for b, *_ in cand[idx:]:
                    if b < state["lb_open"]:
                        state["lb_open"] = b
                return
            if use_pruning and bound >= state["best_value"]:
                continue
            state["nodes"] += 1
            if (state["nodes"] & TIME_CHECK_MASK) == 0 and monotonic() > deadline:
                state["aborted"] = True
                if bound < state["lb_open"]:
                    state["lb_open"] = bound
                for b, *_ in cand[idx + 1:]:
                    if b < state["lb_open"]:
                        state["lb_open"] = b
                return
            old_cost, old_side = unit_cost[u], unit_side[u]
            unit_mask[u] |= bit
            unit_cost[u] = new_cost
            state["sum_cost"] += dcost
            if has_side:
                unit_side[u] += dside
                state["sum_side"] += dside
            if additive:
                state["sum_marg"] += marg_ck[k][c]
            if opens:
                opened[k] += 1
                state["unopened"] -= 1
            descend(depth + 1)
            if opens:
                opened[k] -= 1
                state["unopened"] += 1
            if additive:
                state["sum_marg"] -= marg_ck[k][c]
            if has_side:
                state["sum_side"] -= dside
                unit_side[u] = old_side
            state["sum_cost"] -= dcost
            unit_cost[u] = old_cost
            unit_mask[u] &= ~bit

    descend(0)
    proven = not state["aborted"]
    lb = state["best_value"] if proven else min(state["best_value"], state["lb_open"])
    return SearchResult(state["best_value"], state["best_masks"], state["nodes"],
                        proven, lb)

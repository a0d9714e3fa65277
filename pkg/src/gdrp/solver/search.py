"""Exact solving: branch-and-bound over customer-to-unit assignments.

Tour subsets are costed exactly by dynamic programs (see _kernel/tours);
the search assigns customers to drone units in descending-mass order with
interchangeable units canonicalized by first use.
"""

import math
from time import monotonic
from typing import List, Optional, Sequence

from ..energy import tour_distance, tour_energy
from ..feasibility import FEAS_TOL, check_solution
from ..model import DroneType, Fleet, Instance
from . import engine, tours
from ._kernel import INF, distance_cost_table, feasible_subsets, subset_sums
from .types import Infeasible, SolveOptions, SolveResult, Solution, Tour


def _flat_dist(instance: Instance) -> List[float]:
    n1 = instance.n + 1
    d = instance.distance_matrix
    return [float(d[i, j]) for i in range(n1) for j in range(n1)]


def _flat_coef(instance: Instance, dtype: DroneType) -> List[float]:
    n1 = instance.n + 1
    out = []
    ovr = None
    if instance.leg_coeff_overrides:
        ovr = instance.leg_coeff_overrides.get(dtype.type_id)
    for i in range(n1):
        for j in range(n1):
            el, ef = dtype.takeoff_coeff, dtype.flight_coeff
            if ovr is not None:
                if ovr.takeoff is not None:
                    el = float(ovr.takeoff[i, j])
                if ovr.flight is not None:
                    ef = float(ovr.flight[i, j])
            out.append(el + ef * float(instance.distance_matrix[i, j]))
    return out


def _has_overrides(instance: Instance) -> bool:
    return bool(instance.leg_coeff_overrides)


def _triangle_ok(dist: Sequence[float], n1: int) -> bool:
    for i in range(n1):
        for j in range(n1):
            dij = dist[i * n1 + j]
            for k in range(n1):
                if dij > dist[i * n1 + k] + dist[k * n1 + j] + 1e-9:
                    return False
    return True


def _insertion_detour(dist: Sequence[float], n1: int, node: int) -> float:
    """Min detour of inserting `node` between any leg (metric lower bound)."""
    best = 2.0 * dist[node]  # opening a dedicated round trip
    for a in range(n1):
        if a == node:
            continue
        for b in range(n1):
            if b == node or b == a:
                continue
            det = dist[a * n1 + node] + dist[node * n1 + b] - dist[a * n1 + b]
            if det < best:
                best = det
    return max(0.0, best)


def _greedy_seed(n, h, tables, required, perm):
    """Cheapest-marginal assignment over exact subset costs; None if stuck."""
    k_count = len(h)
    base = [0] * k_count
    for k in range(1, k_count):
        base[k] = base[k - 1] + h[k - 1]
    num_units = sum(h)
    masks = [0] * num_units
    costs = [0.0] * num_units
    opened = [0] * k_count
    unopened = num_units
    for d, c in enumerate(perm):
        bit = 1 << c
        remaining_after = n - d - 1
        best = None
        for k in range(k_count):
            top = opened[k] + 1 if opened[k] < h[k] else opened[k]
            for local in range(top):
                u = base[k] + local
                new_cost = tables[k][masks[u] | bit]
                if new_cost == INF:
                    continue
                opens = masks[u] == 0
                if required and remaining_after < unopened - (1 if opens else 0):
                    continue
                key = (new_cost - costs[u], u)
                if best is None or key < best[0]:
                    best = (key, u, k, new_cost, opens)
        if best is None:
            return None
        _, u, k, new_cost, opens = best
        masks[u] |= bit
        costs[u] = new_cost
        if opens:
            opened[k] += 1
            unopened -= 1
    return sum(costs), masks


def _build_tw_tables(instance, fleet, coefs, dist, stride, mass_of, sub_mass,
                     feas, objective):
    """Per-type subset cost tables under time windows (pure path)."""
    n = instance.n
    if n > 16:
        raise ValueError("time-window solving is supported up to 16 customers")
    windows = {c.id: c.time_window for c in instance.customers}
    service = instance.service_time or 0.0
    size = 1 << n
    cost_tables, side_tables = [], []
    for ki, dtype in enumerate(fleet.types):
        cost = [INF] * size
        side = [INF] * size
        cost[0] = 0.0
        side[0] = 0.0
        for mask in range(1, size):
            if not feas[ki][mask]:
                continue
            cids = [i + 1 for i in range(n) if (mask >> i) & 1]
            res = tours.tw_order(cids, coefs[ki], dist, stride, dtype.self_mass,
                                 mass_of, windows, dtype.speed, service,
                                 dtype.energy_capacity, objective)
            if res is None:
                continue
            d_val, e_val, _ = res
            if objective == "min_energy":
                cost[mask] = e_val
            else:
                cost[mask] = d_val
                side[mask] = e_val
        cost_tables.append(cost)
        side_tables.append(side)
    return cost_tables, side_tables


def solve(instance: Instance, fleet: Fleet, options: Optional[SolveOptions] = None) -> SolveResult:
    """Minimize total energy (or distance) exactly; see SolveOptions."""
    t_start = monotonic()
    opts = options or SolveOptions()
    n = instance.n
    if n < 1:
        raise ValueError("instance must have at least one customer")
    if n > 22:
        raise ValueError("exact solving supports up to 22 customers "
                         "(per-subset tables grow as 2^n)")
    required = opts.dispatch == "required"
    if required and n < fleet.total_units:
        raise Infeasible(
            "dispatch policy requires every unit to fly a non-empty tour, "
            "but there are %d units and only %d customers" % (fleet.total_units, n))
    if opts.enable_time_windows:
        for dtype in fleet.types:
            if dtype.speed is None:
                raise ValueError("time windows need a speed for drone type %d" % dtype.type_id)
        for c in instance.customers:
            if c.time_window is None:
                raise ValueError("time windows enabled but customer %d has none" % c.id)
    if opts.enable_volume:
        if any(t.volume_capacity is not None for t in fleet.types):
            for c in instance.customers:
                if c.package_volume is None:
                    raise ValueError("volume caps enabled but customer %d has no volume" % c.id)

    stride = n + 1
    masses = [c.package_mass for c in instance.customers]
    mass_of = {c.id: c.package_mass for c in instance.customers}
    sub_mass = subset_sums(masses)
    sub_vol = None
    if opts.enable_volume and any(t.volume_capacity is not None for t in fleet.types):
        sub_vol = subset_sums([c.package_volume for c in instance.customers])
    dist = _flat_dist(instance)
    coefs = [_flat_coef(instance, t) for t in fleet.types]
    h = [t.count for t in fleet.types]
    k_count = len(fleet.types)

    feas = []
    for ki, dtype in enumerate(fleet.types):
        vol_cap = dtype.volume_capacity if (sub_vol is not None) else None
        feas.append(feasible_subsets(n, dtype.self_mass, dtype.max_total_mass,
                                     sub_mass, sub_vol, vol_cap))

    metric = not _has_overrides(instance) and _triangle_ok(dist, stride)

    if opts.enable_time_windows:
        cost_tables, tw_side = _build_tw_tables(
            instance, fleet, coefs, dist, stride, mass_of, sub_mass, feas, opts.objective)
        if opts.objective == "min_distance":
            energy_at_dstar = tw_side  # reused by the tie-break pass
        metric = False  # window feasibility is order/path dependent; use additive bounds
    elif opts.objective == "min_energy":
        cost_tables = [engine.energy_cost_table(n, coefs[ki], fleet.types[ki].self_mass,
                                                sub_mass, feas[ki],
                                                fleet.types[ki].energy_capacity)
                       for ki in range(k_count)]
    else:
        cost_tables = []
        energy_at_dstar = []
        for ki, dtype in enumerate(fleet.types):
            d_tbl, e_tbl = distance_cost_table(n, dist, coefs[ki], dtype.self_mass,
                                               sub_mass, feas[ki], dtype.energy_capacity)
            cost_tables.append(d_tbl)
            energy_at_dstar.append(e_tbl)

    # Per-customer eligibility; weight exclusions are conclusive for any
    # matrix, energy/window exclusions only on metric instances.
    eligible = []
    for ci in range(n):
        by_weight = [ki for ki, t in enumerate(fleet.types)
                     if t.self_mass + masses[ci] <= t.max_total_mass + FEAS_TOL
                     and feas[ki][1 << ci]]
        if not by_weight:
            raise Infeasible("customer %d is too heavy for every drone type"
                             % (ci + 1))
        if metric:
            by_cost = [ki for ki in by_weight if cost_tables[ki][1 << ci] < INF]
            if not by_cost:
                raise Infeasible("customer %d cannot be served within any "
                                 "type's energy capacity" % (ci + 1))
            eligible.append(by_cost)
        else:
            eligible.append(by_weight)

    # Lower-bound marginals per unassigned customer.
    marg_ck = None
    if metric:
        marg = []
        for ci in range(n):
            if opts.objective == "min_energy":
                best = min(masses[ci] * coefs[ki][ci + 1]
                           + fleet.types[ki].self_mass * fleet.types[ki].takeoff_coeff
                           for ki in eligible[ci])
            else:
                best = _insertion_detour(dist, stride, ci + 1)
            marg.append(best)
    else:
        marg = []
        marg_ck = []
        for ki in range(k_count):
            m0 = fleet.types[ki].self_mass
            row = []
            for ci in range(n):
                col = ci + 1
                if opts.objective == "min_energy":
                    arr = min(coefs[ki][j * stride + col]
                              for j in range(stride) if j != col)
                    row.append((m0 + masses[ci]) * arr)
                else:
                    row.append(min(dist[j * stride + col]
                                   for j in range(stride) if j != col))
            marg_ck.append(row)
        for ci in range(n):
            marg.append(min(marg_ck[ki][ci] for ki in eligible[ci]))

    perm = sorted(range(n), key=lambda ci: (-masses[ci], ci))
    marg_suffix = [0.0] * (n + 1)
    for d in range(n - 1, -1, -1):
        marg_suffix[d] = marg_suffix[d + 1] + marg[perm[d]]
    zero_suffix = [0.0] * (n + 1)

    seed = _greedy_seed(n, h, cost_tables, required, perm)
    seed_value, seed_masks = seed if seed else (None, None)

    res = engine.run_bb(n, h, cost_tables, None, INF, marg_suffix, zero_suffix,
                        marg_ck, perm, required, opts.use_pruning,
                        opts.time_limit_s, seed_value, seed_masks)
    nodes = res.nodes

    if res.value == INF or res.masks is None:
        if res.proven:
            raise Infeasible("no assignment satisfies the weight/energy caps"
                             + (" under the required-dispatch policy" if required else ""))
        return SolveResult(best=None, proven_optimal=False, relative_gap=INF,
                           nodes_explored=nodes, wall_time_s=monotonic() - t_start)

    masks = res.masks
    proven = res.proven
    lower_bound = res.lower_bound

    if (opts.objective == "min_distance" and opts.tie_break == "min_energy"
            and res.proven):
        # Re-optimize energy among distance-optimal solutions: per-tour cost
        # becomes the min energy over distance-optimal orders, with the total
        # of per-tour optimal distances capped at the proven optimum.
        unit_types = [ki for ki in range(k_count) for _ in range(h[ki])]
        seed2_value = 0.0
        for u, mask in enumerate(masks):
            seed2_value += energy_at_dstar[unit_types[u]][mask]
        if metric:
            marg2 = [min(masses[ci] * coefs[ki][ci + 1]
                         + fleet.types[ki].self_mass * fleet.types[ki].takeoff_coeff
                         for ki in eligible[ci]) for ci in range(n)]
            marg2_ck = None
            side_marg = [marg[perm[d]] for d in range(n)]
        else:
            marg2_ck = []
            for ki in range(k_count):
                m0 = fleet.types[ki].self_mass
                marg2_ck.append([(m0 + masses[ci])
                                 * min(coefs[ki][j * stride + ci + 1]
                                       for j in range(stride) if j != ci + 1)
                                 for ci in range(n)])
            marg2 = [min(marg2_ck[ki][ci] for ki in eligible[ci]) for ci in range(n)]
            side_marg = [0.0] * n
        marg2_suffix = [0.0] * (n + 1)
        side_suffix = [0.0] * (n + 1)
        for d in range(n - 1, -1, -1):
            marg2_suffix[d] = marg2_suffix[d + 1] + marg2[perm[d]]
            side_suffix[d] = side_suffix[d + 1] + side_marg[d]
        remaining = max(1e-3, opts.time_limit_s - (monotonic() - t_start))
        res2 = engine.run_bb(n, h, energy_at_dstar, cost_tables, res.value,
                             marg2_suffix, side_suffix, marg2_ck, perm, required,
                             opts.use_pruning, remaining, seed2_value, masks)
        nodes += res2.nodes
        if res2.masks is not None and res2.value < INF:
            masks = res2.masks
        proven = proven and res2.proven

    solution = _reconstruct(instance, fleet, opts, masks, coefs, dist, stride, mass_of)
    report = check_solution(solution, fleet, instance, opts)
    if not report.feasible:
        raise RuntimeError("internal error: solver emitted an infeasible solution: %r"
                           % (report.violations,))

    if proven:
        gap = 0.0
    else:
        best_obj = res.value
        gap = ((best_obj - lower_bound) / lower_bound
               if lower_bound > 0 and math.isfinite(best_obj) else INF)
    return SolveResult(best=solution, proven_optimal=proven,
                       relative_gap=gap, nodes_explored=nodes,
                       wall_time_s=monotonic() - t_start)


def _reconstruct(instance, fleet, opts, masks, coefs, dist, stride, mass_of) -> Solution:
    n = instance.n
    h = [t.count for t in fleet.types]
    unit_types = [ki for ki in range(len(h)) for _ in range(h[ki])]
    windows = {c.id: c.time_window for c in instance.customers}
    service = instance.service_time or 0.0
    tours_out: List[Tour] = []
    next_unit = {t.type_id: 0 for t in fleet.types}
    for u, mask in enumerate(masks):
        if not mask:
            continue
        ki = unit_types[u]
        dtype = fleet.types[ki]
        cids = [i + 1 for i in range(n) if (mask >> i) & 1]
        if opts.enable_time_windows:
            res = tours.tw_order(cids, coefs[ki], dist, stride, dtype.self_mass,
                                 mass_of, windows, dtype.speed, service,
                                 dtype.energy_capacity, opts.objective)
            if res is None:
                raise RuntimeError("internal error: chosen subset lost feasibility")
            order = res[2]
        elif opts.objective == "min_energy":
            _, order = tours.energy_order(cids, coefs[ki], stride, dtype.self_mass, mass_of)
        else:
            res = tours.distance_order(cids, coefs[ki], dist, stride,
                                       dtype.self_mass, mass_of, dtype.energy_capacity)
            if res is None:
                raise RuntimeError("internal error: chosen subset lost feasibility")
            order = res[2]
        next_unit[dtype.type_id] += 1
        tours_out.append(Tour(
            drone_type=dtype.type_id,
            unit_index=next_unit[dtype.type_id],
            visits=tuple(order),
            energy=tour_energy(order, dtype, instance),
            distance=tour_distance(order, instance)))
    tours_out.sort(key=lambda t: (t.drone_type, t.unit_index))
    total_e = sum(t.energy for t in tours_out)
    total_d = sum(t.distance for t in tours_out)
    return Solution(tours=tuple(tours_out), total_energy=total_e, total_distance=total_d)


def evaluate_fixed_routes(solution, fleet: Fleet, instance: Instance,
                          options: Optional[SolveOptions] = None):
    """Re-score a fixed set of routes from scratch: (energy, distance, report)."""
    total_e = 0.0
    total_d = 0.0
    for t in solution.tours:
        dtype = fleet.type_by_id(t.drone_type)
        total_e += tour_energy(t.visits, dtype, instance)
        total_d += tour_distance(t.visits, instance)
    report = check_solution(solution, fleet, instance, options)
    return total_e, total_d, report

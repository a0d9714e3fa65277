"""Exhaustive oracle: enumerate partitions, assignments and visit orders.

Deliberately independent of the branch-and-bound path: plain itertools
permutations scored through the energy/feasibility modules. Guarded to
small instances (factorial enumeration).
"""

from itertools import permutations
from time import monotonic
from typing import Dict, FrozenSet, List, Optional, Tuple

from ..energy import tour_distance, tour_energy
from ..feasibility import (FEAS_TOL, check_time_windows, check_volume,
                           check_weight)
from ..model import DroneType, Fleet, Instance
from .types import Infeasible, SolveOptions, SolveResult, Solution, TooLarge, Tour

MAX_BRUTE_N = 8


def _partitions(items: List[int], max_blocks: int):
    """All set partitions of items into at most max_blocks blocks."""
    blocks: List[List[int]] = []

    def rec(i):
        if i == len(items):
            yield [tuple(b) for b in blocks]
            return
        x = items[i]
        for b in blocks:
            b.append(x)
            yield from rec(i + 1)
            b.pop()
        if len(blocks) < max_blocks:
            blocks.append([x])
            yield from rec(i + 1)
            blocks.pop()

    yield from rec(0)


def _best_order(block: Tuple[int, ...], dtype: DroneType, instance: Instance,
                opts: SolveOptions) -> Optional[Tuple[float, float, Tuple[int, ...]]]:
    """Best (objective-ordered) feasible ordering of one block, or None."""
    if not check_weight(block, dtype, instance).feasible:
        return None
    if opts.enable_volume and not check_volume(block, dtype, instance).feasible:
        return None
    best = None
    for order in permutations(block):
        energy = tour_energy(order, dtype, instance)
        if energy > dtype.energy_capacity + FEAS_TOL:
            continue
        if opts.enable_time_windows and not check_time_windows(order, dtype, instance).feasible:
            continue
        distance = tour_distance(order, instance)
        key = ((energy, distance) if opts.objective == "min_energy"
               else (distance, energy))
        if best is None or key < best[0]:
            best = (key, order)
    if best is None:
        return None
    (a, b), order = best
    if opts.objective == "min_energy":
        return a, b, order  # (energy, distance, order)
    return b, a, order      # stored as (energy, distance, order)


def brute_force(instance: Instance, fleet: Fleet,
                options: Optional[SolveOptions] = None) -> SolveResult:
    """Exact optimum by full enumeration; proven_optimal always true."""
    t_start = monotonic()
    opts = options or SolveOptions()
    n = instance.n
    if n > MAX_BRUTE_N:
        raise TooLarge("brute force is guarded to n <= %d, got %d" % (MAX_BRUTE_N, n))
    if n < 1:
        raise ValueError("instance must have at least one customer")
    required = opts.dispatch == "required"
    total_units = fleet.total_units
    if required and n < total_units:
        raise Infeasible("required dispatch with %d units but %d customers"
                         % (total_units, n))

    cache: Dict[Tuple[FrozenSet[int], int], Optional[Tuple[float, float, Tuple[int, ...]]]] = {}

    def block_best(block: Tuple[int, ...], dtype: DroneType):
        key = (frozenset(block), dtype.type_id)
        if key not in cache:
            cache[key] = _best_order(block, dtype, instance, opts)
        return cache[key]

    customers = [c.id for c in instance.customers]
    best_key = None
    best_assignment = None
    evaluated = 0

    for blocks in _partitions(customers, total_units):
        if required and len(blocks) != total_units:
            continue

        def assign(bi, used_counts, acc_energy, acc_distance, acc):
            nonlocal best_key, best_assignment, evaluated
            if bi == len(blocks):
                evaluated += 1
                key = ((acc_energy, acc_distance) if opts.objective == "min_energy"
                       else (acc_distance, acc_energy))
                if best_key is None or key < best_key:
                    best_key = key
                    best_assignment = list(acc)
                return
            block = blocks[bi]
            for ti, dtype in enumerate(fleet.types):
                if used_counts[ti] >= dtype.count:
                    continue
                got = block_best(block, dtype)
                if got is None:
                    continue
                energy, distance, order = got
                used_counts[ti] += 1
                acc.append((dtype.type_id, order, energy, distance))
                assign(bi + 1, used_counts, acc_energy + energy,
                       acc_distance + distance, acc)
                acc.pop()
                used_counts[ti] -= 1

        assign(0, [0] * len(fleet.types), 0.0, 0.0, [])

    if best_assignment is None:
        raise Infeasible("no feasible assignment exists"
                         + (" under the required-dispatch policy" if required else ""))

    next_unit = {t.type_id: 0 for t in fleet.types}
    tours = []
    for type_id, order, energy, distance in sorted(
            best_assignment, key=lambda b: (b[0], tuple(sorted(b[1])))):
        next_unit[type_id] += 1
        tours.append(Tour(drone_type=type_id, unit_index=next_unit[type_id],
                          visits=tuple(order), energy=energy, distance=distance))
    solution = Solution(tours=tuple(tours),
                        total_energy=sum(t.energy for t in tours),
                        total_distance=sum(t.distance for t in tours))
    return SolveResult(best=solution, proven_optimal=True, relative_gap=0.0,
                       nodes_explored=evaluated, wall_time_s=monotonic() - t_start)

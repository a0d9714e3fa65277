"""Exact visit-order optimization for a single tour's customer set.

Used to reconstruct orders for the kernel's chosen subsets and to build
cost tables for the time-window variant. All functions work on the same
flattened leg-coefficient/distance layout as the kernel.
"""

import math
from typing import Dict, List, Optional, Sequence, Tuple

INF = math.inf
FEAS_EPS = 1e-9


def energy_order(cids: Sequence[int], coef: Sequence[float], stride: int,
                 m0: float, mass_of: Dict[int, float]) -> Tuple[float, List[int]]:
    """Minimum-energy visit order for one tour; deterministic tie handling."""
    ids = list(cids)
    m = len(ids)
    if m == 0:
        return 0.0, []
    mass = [mass_of[c] for c in ids]
    full = (1 << m) - 1
    sub_mass = [0.0] * (1 << m)
    for s in range(1, 1 << m):
        low = s & -s
        sub_mass[s] = sub_mass[s ^ low] + mass[low.bit_length() - 1]
    memo: Dict[Tuple[int, int], float] = {}

    def g(t: int, f: int) -> float:
        key = (t, f)
        got = memo.get(key)
        if got is not None:
            return got
        rest = t & ~(1 << f)
        if rest == 0:
            val = coef[ids[f] * stride] * m0
        else:
            w = m0 + sub_mass[rest]
            val = INF
            row = ids[f] * stride
            for f2 in range(m):
                if (rest >> f2) & 1:
                    v = coef[row + ids[f2]] * w + g(rest, f2)
                    if v < val:
                        val = v
        memo[key] = val
        return val

    launch = m0 + sub_mass[full]
    best, first = INF, -1
    for f in range(m):
        v = coef[ids[f]] * launch + g(full, f)
        if v < best:
            best, first = v, f
    order = [first]
    t, f = full, first
    while t & ~(1 << f):
        rest = t & ~(1 << f)
        w = m0 + sub_mass[rest]
        target = g(t, f)
        row = ids[f] * stride
        nxt = -1
        for f2 in range(m):
            if (rest >> f2) & 1:
                if abs(coef[row + ids[f2]] * w + g(rest, f2) - target) <= 1e-9 * max(1.0, abs(target)):
                    nxt = f2
                    break
        if nxt < 0:  # numerical safety: fall back to the argmin
            cand = [(coef[row + ids[f2]] * w + g(rest, f2), f2)
                    for f2 in range(m) if (rest >> f2) & 1]
            nxt = min(cand)[1]
        order.append(nxt)
        t, f = rest, nxt
    return best, [ids[i] for i in order]


def distance_order(cids: Sequence[int], coef: Sequence[float], dist: Sequence[float],
                   stride: int, m0: float, mass_of: Dict[int, float],
                   energy_cap: float) -> Optional[Tuple[float, float, List[int]]]:
    """Lexicographic (distance, energy) optimal order under the energy cap.

    Returns (distance, energy, order) or None when no ordering fits the cap.
    """
    ids = list(cids)
    m = len(ids)
    if m == 0:
        return 0.0, 0.0, []
    mass = [mass_of[c] for c in ids]
    sub_mass = [0.0] * (1 << m)
    for s in range(1, 1 << m):
        low = s & -s
        sub_mass[s] = sub_mass[s ^ low] + mass[low.bit_length() - 1]
    full = (1 << m) - 1
    # frontier[(t, f)] = list of (D, E, next_f, next_point_index)
    frontier: Dict[Tuple[int, int], List[Tuple[float, float, int, int]]] = {}
    order_of_popcount = sorted(range(1, full + 1), key=lambda s: (bin(s).count("1"), s))
    for t in order_of_popcount:
        for f in range(m):
            if not (t >> f) & 1:
                continue
            rest = t & ~(1 << f)
            if rest == 0:
                pts = [(dist[ids[f] * stride], coef[ids[f] * stride] * m0, -1, -1)]
            else:
                w = m0 + sub_mass[rest]
                row = ids[f] * stride
                raw = []
                for f2 in range(m):
                    if (rest >> f2) & 1:
                        leg_d = dist[row + ids[f2]]
                        leg_e = coef[row + ids[f2]] * w
                        for idx, (d2, e2, _, _) in enumerate(frontier[(rest, f2)]):
                            e = leg_e + e2
                            if e <= energy_cap + FEAS_EPS:
                                raw.append((leg_d + d2, e, f2, idx))
                raw.sort(key=lambda p: (p[0], p[1]))
                pts = []
                best_e = INF
                for p in raw:
                    if p[1] < best_e - 1e-15:
                        pts.append(p)
                        best_e = p[1]
            frontier[(t, f)] = pts

    launch = m0 + sub_mass[full]
    cand = []
    for f in range(m):
        for idx, (d2, e2, _, _) in enumerate(frontier[(full, f)]):
            e = coef[ids[f]] * launch + e2
            if e <= energy_cap + FEAS_EPS:
                cand.append((dist[ids[f]] + d2, e, f, idx))
    if not cand:
        return None
    dstar = min(c[0] for c in cand)
    best = min((c for c in cand if c[0] <= dstar + FEAS_EPS), key=lambda c: (c[1], c[2]))
    _, _, f, idx = best
    order = [f]
    t = full
    while True:
        d2, e2, nf, nidx = frontier[(t, f)][idx]
        if nf < 0:
            break
        order.append(nf)
        t, f, idx = t & ~(1 << f), nf, nidx
    return best[0], best[1], [ids[i] for i in order]


def tw_order(cids: Sequence[int], coef: Sequence[float], dist: Sequence[float],
             stride: int, m0: float, mass_of: Dict[int, float],
             windows: Dict[int, Tuple[float, float]], speed: float, service: float,
             energy_cap: float, objective: str) -> Optional[Tuple[float, float, List[int]]]:
    """Best time-window-feasible order; None if none exists.

    Forward labeling over (visited set, last customer) with Pareto pruning
    on (distance, energy, completion time). objective 'min_energy' picks
    lexicographic (E, D); 'min_distance' picks (D, E) under the cap.
    """
    ids = list(cids)
    m = len(ids)
    if m == 0:
        return 0.0, 0.0, []
    mass = [mass_of[c] for c in ids]
    total_mass = sum(mass)
    launch = m0 + total_mass
    sub_mass = [0.0] * (1 << m)
    for s in range(1, 1 << m):
        low = s & -s
        sub_mass[s] = sub_mass[s ^ low] + mass[low.bit_length() - 1]
    # labels[(v, f)] = list of (D, E, t, parent_f, parent_idx)
    labels: Dict[Tuple[int, int], List[Tuple[float, float, float, int, int]]] = {}

    def push(key, lab):
        pts = labels.setdefault(key, [])
        for d, e, t, _, _ in pts:
            if d <= lab[0] + 1e-15 and e <= lab[1] + 1e-15 and t <= lab[2] + 1e-15:
                return
        pts[:] = [p for p in pts
                  if not (lab[0] <= p[0] + 1e-15 and lab[1] <= p[1] + 1e-15
                          and lab[2] <= p[2] + 1e-15)]
        pts.append(lab)

    for f in range(m):
        cid = ids[f]
        a, b = windows[cid]
        arrive = dist[cid] / speed
        start = max(a, arrive)
        if start > b + FEAS_EPS:
            continue
        e = coef[cid] * launch
        if e <= energy_cap + FEAS_EPS:
            push((1 << f, f), (dist[cid], e, start, -1, -1))

    order_of_popcount = sorted(range(1, 1 << m), key=lambda s: (bin(s).count("1"), s))
    for v in order_of_popcount:
        for f in range(m):
            if not (v >> f) & 1 or (v, f) not in labels:
                continue
            w = m0 + total_mass - sub_mass[v]
            row = ids[f] * stride
            for idx, (d0, e0, t0, _, _) in enumerate(labels[(v, f)]):
                for f2 in range(m):
                    if (v >> f2) & 1:
                        continue
                    cid2 = ids[f2]
                    a, b = windows[cid2]
                    start = max(a, t0 + service + dist[row + cid2] / speed)
                    if start > b + FEAS_EPS:
                        continue
                    e = e0 + coef[row + cid2] * w
                    if e > energy_cap + FEAS_EPS:
                        continue
                    push((v | (1 << f2), f2),
                         (d0 + dist[row + cid2], e, start, f, idx))

    full = (1 << m) - 1
    cand = []
    for f in range(m):
        for idx, (d0, e0, t0, _, _) in enumerate(labels.get((full, f), [])):
            d = d0 + dist[ids[f] * stride]
            e = e0 + coef[ids[f] * stride] * m0
            if e <= energy_cap + FEAS_EPS:
                cand.append((d, e, f, idx))
    if not cand:
        return None
    if objective == "min_energy":
        best = min(cand, key=lambda c: (c[1], c[0], c[2]))
    else:
        dstar = min(c[0] for c in cand)
        best = min((c for c in cand if c[0] <= dstar + FEAS_EPS),
                   key=lambda c: (c[1], c[2]))
    d, e, f, idx = best
    rev = []
    v = full
    while f >= 0:
        rev.append(f)
        _, _, _, pf, pidx = labels[(v, f)][idx]
        v &= ~(1 << f)
        f, idx = pf, pidx
    rev.reverse()
    return d, e, [ids[i] for i in rev]

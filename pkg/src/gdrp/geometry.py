"""No-fly zone handling: convex polygon obstacles and detour distances.

Flight is planar; a leg blocked by an obstacle interior is rerouted along
the shortest polyline through obstacle vertices (visibility graph).
"""

import heapq
import math
from typing import List, Sequence, Tuple

import numpy as np

Point = Tuple[float, float]
Polygon = Sequence[Point]

_EPS = 1e-9


class NodeInsideNoFlyZone(ValueError):
    """A depot/customer position lies strictly inside an obstacle."""

    def __init__(self, node: int):
        self.node = node
        super().__init__("node %d lies strictly inside a no-fly zone" % node)


class NoDetourPath(ValueError):
    """No collision-free polyline exists between two nodes."""


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _normalize_ccw(poly: Polygon) -> List[Point]:
    """Validate convexity and return vertices in counter-clockwise order."""
    pts = [(float(x), float(y)) for x, y in poly]
    if len(pts) < 3:
        raise ValueError("obstacle polygon needs at least 3 vertices")
    area2 = sum(pts[i][0] * pts[(i + 1) % len(pts)][1] - pts[(i + 1) % len(pts)][0] * pts[i][1]
                for i in range(len(pts)))
    if abs(area2) < _EPS:
        raise ValueError("obstacle polygon is degenerate (zero area)")
    if area2 < 0:
        pts.reverse()
    m = len(pts)
    for i in range(m):
        if _cross(pts[i], pts[(i + 1) % m], pts[(i + 2) % m]) < -_EPS:
            raise ValueError("obstacle polygon must be convex")
    return pts


def _strictly_inside(p: Point, ccw: List[Point]) -> bool:
    m = len(ccw)
    return all(_cross(ccw[i], ccw[(i + 1) % m], p) > _EPS for i in range(m))


def _segment_blocked(p: Point, q: Point, ccw: List[Point]) -> bool:
    """True iff the open segment pq passes through the polygon interior.

    Clips the segment against the polygon's half-planes; touching the
    boundary (a vertex or sliding along an edge) does not count as blocked.
    """
    t0, t1 = 0.0, 1.0
    m = len(ccw)
    for i in range(m):
        a, b = ccw[i], ccw[(i + 1) % m]
        s0 = _cross(a, b, p)
        s1 = _cross(a, b, q)
        ds = s1 - s0
        if abs(ds) < _EPS * _EPS:
            if s0 < 0:
                return False  # parallel and outside this half-plane
            continue
        t_hit = -s0 / ds
        if ds > 0:
            t0 = max(t0, t_hit)  # entering the half-plane
        else:
            t1 = min(t1, t_hit)  # leaving it
        if t0 >= t1:
            return False
    if t1 - t0 < 1e-12:
        return False
    mid = 0.5 * (t0 + t1)
    pm = (p[0] + mid * (q[0] - p[0]), p[1] + mid * (q[1] - p[1]))
    return _strictly_inside(pm, ccw)


def segment_is_clear(p: Point, q: Point, obstacles: Sequence[Polygon]) -> bool:
    """True iff the straight leg pq avoids every obstacle interior."""
    ccws = [_normalize_ccw(poly) for poly in obstacles]
    return not any(_segment_blocked(p, q, ccw) for ccw in ccws)


def apply_no_fly_detours(distance_matrix: np.ndarray,
                         positions: Sequence[Point],
                         obstacles: Sequence[Polygon]) -> np.ndarray:
    """Replace blocked straight-line distances by shortest detour lengths.

    positions[0] is the depot; entries whose straight segment crosses an
    obstacle interior get the length of the shortest collision-free
    polyline over obstacle vertices. Distances never decrease.
    """
    d = np.array(distance_matrix, dtype=float)
    if not obstacles:
        return d
    ccws = [_normalize_ccw(poly) for poly in obstacles]
    n_nodes = len(positions)
    for i, p in enumerate(positions):
        for ccw in ccws:
            if _strictly_inside(p, ccw):
                raise NodeInsideNoFlyZone(i)

    pts: List[Point] = [(float(x), float(y)) for x, y in positions]
    for ccw in ccws:
        pts.extend(ccw)
    v = len(pts)

    def clear(a: int, b: int) -> bool:
        if a == b:
            return True
        return not any(_segment_blocked(pts[a], pts[b], ccw) for ccw in ccws)

    blocked_pairs = [(i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes)
                     if not clear(i, j)]
    if not blocked_pairs:
        return d

    vis = [[False] * v for _ in range(v)]
    for a in range(v):
        for b in range(a + 1, v):
            vis[a][b] = vis[b][a] = clear(a, b)

    def euclid(a: int, b: int) -> float:
        return math.hypot(pts[a][0] - pts[b][0], pts[a][1] - pts[b][1])

    sources = sorted({i for i, _ in blocked_pairs} | {j for _, j in blocked_pairs})
    shortest = {}
    for src in sources:
        dist = [math.inf] * v
        dist[src] = 0.0
        heap = [(0.0, src)]
        while heap:
            du, u = heapq.heappop(heap)
            if du > dist[u] + 1e-15:
                continue
            for w in range(v):
                if u != w and vis[u][w]:
                    nd = du + euclid(u, w)
                    if nd < dist[w] - 1e-15:
                        dist[w] = nd
                        heapq.heappush(heap, (nd, w))
        shortest[src] = dist

    for i, j in blocked_pairs:
        path = shortest[i][j]
        if not math.isfinite(path):
            raise NoDetourPath("no collision-free path between nodes %d and %d" % (i, j))
        val = max(float(d[i, j]), path)
        d[i, j] = d[j, i] = val
    return d

import itertools
import math
import random

import numpy as np
import pytest
from shapely.geometry import LineString, Point, Polygon

from gdrp.geometry import (NodeInsideNoFlyZone, apply_no_fly_detours,
                           segment_is_clear)
from gdrp.model import Customer, build_distance_matrix, make_instance

SQUARE = [(0.9, -0.1), (1.1, -0.1), (1.1, 0.1), (0.9, 0.1)]


def oracle_blocked(p, q, poly):
    """Independent collision check: shapely with a shrunken interior."""
    inner = Polygon(poly).buffer(-1e-9)
    return LineString([p, q]).intersection(inner).length > 1e-9


def oracle_detour(p, q, polys, max_via=4):
    """Brute-force shortest polyline through any obstacle-vertex sequence."""
    verts = [v for poly in polys for v in poly]
    best = math.inf
    for r in range(min(len(verts), max_via) + 1):
        for mid in itertools.permutations(verts, r):
            path = [p] + list(mid) + [q]
            if any(oracle_blocked(a, b, poly)
                   for a, b in zip(path, path[1:]) for poly in polys):
                continue
            best = min(best, sum(math.dist(a, b) for a, b in zip(path, path[1:])))
    return best


def test_no_obstacles_is_identity():
    c = [Customer(id=1, position=(2.0, 0.0), package_mass=1.0)]
    d = build_distance_matrix((0, 0), c)
    out = apply_no_fly_detours(d, [(0, 0), (2, 0)], [])
    assert np.array_equal(out, d)


def test_square_detour_matches_bruteforce_oracle():
    positions = [(0.0, 0.0), (2.0, 0.0)]
    d = build_distance_matrix((0, 0), [Customer(id=1, position=(2.0, 0.0), package_mass=1.0)])
    out = apply_no_fly_detours(d, positions, [SQUARE])
    expected = oracle_detour(positions[0], positions[1], [SQUARE])
    assert math.isfinite(expected)
    assert abs(out[0, 1] - expected) < 1e-9
    assert out[0, 1] > 2.0
    assert out[1, 0] == out[0, 1]


def test_node_inside_zone_raises():
    c = [Customer(id=1, position=(1.0, 0.0), package_mass=1.0)]
    d = build_distance_matrix((0, 0), c)
    big = [(0.5, -0.5), (1.5, -0.5), (1.5, 0.5), (0.5, 0.5)]
    with pytest.raises(NodeInsideNoFlyZone) as exc:
        apply_no_fly_detours(d, [(0, 0), (1.0, 0.0)], [big])
    assert exc.value.node == 1


def test_node_on_boundary_is_allowed():
    c = [Customer(id=1, position=(0.9, 0.0), package_mass=1.0)]
    d = build_distance_matrix((0, 0), c)
    out = apply_no_fly_detours(d, [(0, 0), (0.9, 0.0)], [SQUARE])
    assert out[0, 1] == d[1, 0]


def test_grazing_edge_not_blocked():
    # path sliding along the square's top edge never enters the interior
    assert segment_is_clear((0.9, 0.1), (1.1, 0.1), [SQUARE])
    assert segment_is_clear((0.0, 0.1), (2.0, 0.1), [SQUARE])
    assert not segment_is_clear((0.0, 0.0), (2.0, 0.0), [SQUARE])


def test_detours_never_decrease_distances():
    rng = random.Random(3)
    for _ in range(25):
        pts = [(rng.uniform(-4, 4), rng.uniform(-4, 4)) for _ in range(5)]
        cx, cy = rng.uniform(-2, 2), rng.uniform(-2, 2)
        r = rng.uniform(0.1, 0.8)
        poly = [(cx - r, cy - r), (cx + r, cy - r), (cx + r, cy + r), (cx - r, cy + r)]
        if any(Polygon(poly).buffer(-1e-9).contains(Point(p)) for p in pts):
            continue
        customers = [Customer(id=i + 1, position=p, package_mass=1.0)
                     for i, p in enumerate(pts[1:])]
        d = build_distance_matrix(pts[0], customers)
        out = apply_no_fly_detours(d, pts, [poly])
        assert np.all(out >= d - 1e-12)
        # replaced entries agree with the independent oracle
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if out[i, j] > d[i, j] + 1e-12:
                    want = oracle_detour(pts[i], pts[j], [poly])
                    assert abs(out[i, j] - want) < 1e-9


def test_two_obstacles():
    positions = [(0.0, 0.0), (4.0, 0.0)]
    polys = [SQUARE, [(2.9, -0.2), (3.1, -0.2), (3.1, 0.2), (2.9, 0.2)]]
    c = [Customer(id=1, position=(4.0, 0.0), package_mass=1.0)]
    d = build_distance_matrix((0, 0), c)
    out = apply_no_fly_detours(d, positions, polys)
    want = oracle_detour(positions[0], positions[1], polys)
    assert abs(out[0, 1] - want) < 1e-9


def test_invalid_polygons_rejected():
    c = [Customer(id=1, position=(2.0, 0.0), package_mass=1.0)]
    d = build_distance_matrix((0, 0), c)
    with pytest.raises(ValueError):
        apply_no_fly_detours(d, [(0, 0), (2, 0)], [[(0, 0), (1, 0)]])
    nonconvex = [(0, 0), (2, 0), (1, 0.2), (2, 1), (0, 1)]
    shifted = [(x + 0.2, y - 0.5) for x, y in nonconvex]
    with pytest.raises(ValueError):
        apply_no_fly_detours(d, [(0, 0), (2, 0)], [shifted])


def test_make_instance_applies_detours():
    c = [Customer(id=1, position=(2.0, 0.0), package_mass=1.0)]
    inst = make_instance((0, 0), c, obstacles=[SQUARE])
    euclid = 2.0
    assert inst.distance(0, 1) > euclid
    assert inst.obstacles is not None

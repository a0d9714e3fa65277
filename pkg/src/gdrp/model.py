"""Domain types and instance construction for green drone routing.

Units: positions and distances in km, masses in kg, energy in Wh,
volumes in liters, times in hours.
"""

import json
import math
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np


class OutOfRange(ValueError):
    """Requested builtin size outside the shipped data range."""


@dataclass(frozen=True)
class Customer:
    """A delivery request: node index, planar position and package data."""

    id: int
    position: Tuple[float, float]
    package_mass: float
    package_volume: Optional[float] = None
    time_window: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.id < 1:
            raise ValueError("customer id must be a positive integer, got %r" % (self.id,))
        if not (self.package_mass > 0):
            raise ValueError("customer %d: package_mass must be > 0" % self.id)
        if self.time_window is not None:
            a, b = self.time_window
            if a > b:
                raise ValueError("customer %d: time window [%g, %g] is reversed" % (self.id, a, b))


@dataclass(frozen=True)
class DroneType:
    """Per-type physical and energy parameters.

    takeoff_coeff is Wh per kg (applied once per flight leg), flight_coeff
    is Wh per kg per km, both multiplying the drone's current total mass.
    """

    type_id: int
    self_mass: float
    takeoff_coeff: float
    flight_coeff: float
    max_total_mass: float
    energy_capacity: float
    count: int = 1
    volume_capacity: Optional[float] = None
    speed: Optional[float] = None

    def __post_init__(self):
        if not (self.self_mass > 0):
            raise ValueError("drone type %d: self_mass must be > 0" % self.type_id)
        if not (self.max_total_mass > self.self_mass):
            raise ValueError("drone type %d: max_total_mass must exceed self_mass" % self.type_id)
        if self.takeoff_coeff < 0:
            raise ValueError("drone type %d: takeoff_coeff must be >= 0" % self.type_id)
        if not (self.flight_coeff > 0):
            raise ValueError("drone type %d: flight_coeff must be > 0" % self.type_id)
        if not (self.energy_capacity > 0):
            raise ValueError("drone type %d: energy_capacity must be > 0" % self.type_id)
        if self.count < 1:
            raise ValueError("drone type %d: count must be >= 1" % self.type_id)

    @property
    def max_payload(self) -> float:
        return self.max_total_mass - self.self_mass


@dataclass(frozen=True)
class Fleet:
    """An ordered collection of drone types; unit t of type k is (k, t), t in 1..count."""

    types: Tuple[DroneType, ...]

    def __post_init__(self):
        if not self.types:
            raise ValueError("fleet must contain at least one drone type")
        ids = [t.type_id for t in self.types]
        if len(set(ids)) != len(ids):
            raise ValueError("fleet type ids must be distinct, got %r" % (ids,))
        object.__setattr__(self, "types", tuple(self.types))

    def type_by_id(self, type_id: int) -> DroneType:
        for t in self.types:
            if t.type_id == type_id:
                return t
        raise KeyError("no drone type with id %d" % type_id)

    def units(self) -> List[Tuple[int, int]]:
        """All (type_id, unit_index) pairs, unit indices 1-based."""
        return [(t.type_id, u) for t in self.types for u in range(1, t.count + 1)]

    @property
    def total_units(self) -> int:
        return sum(t.count for t in self.types)


@dataclass(frozen=True)
class LegCoeffOverride:
    """Per-leg coefficient matrices replacing a type's global e_l / e_f values."""

    takeoff: Optional[np.ndarray] = None
    flight: Optional[np.ndarray] = None


@dataclass(frozen=True)
class Instance:
    """Depot + customers + symmetric distance matrix (node 0 = depot)."""

    depot_position: Tuple[float, float]
    customers: Tuple[Customer, ...]
    distance_matrix: np.ndarray
    leg_coeff_overrides: Optional[Dict[int, LegCoeffOverride]] = None
    service_time: Optional[float] = None
    obstacles: Optional[Tuple[Tuple[Tuple[float, float], ...], ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "customers", tuple(self.customers))
        n = len(self.customers)
        d = np.asarray(self.distance_matrix, dtype=float)
        if d.shape != (n + 1, n + 1):
            raise ValueError("distance matrix must be %dx%d, got %r" % (n + 1, n + 1, d.shape))
        if not np.all(np.isfinite(d)):
            raise ValueError("distance matrix contains non-finite entries")
        if np.any(d < 0):
            raise ValueError("distances must be non-negative")
        if np.any(np.abs(np.diag(d)) > 1e-12):
            raise ValueError("distance matrix diagonal must be zero")
        if np.any(np.abs(d - d.T) > 1e-9):
            raise ValueError("distance matrix must be symmetric")
        ids = sorted(c.id for c in self.customers)
        if ids != list(range(1, n + 1)):
            raise ValueError("customer ids must be exactly 1..%d, got %r" % (n, ids))
        if [c.id for c in self.customers] != list(range(1, n + 1)):
            raise ValueError("customers must be ordered by id (node index = id)")
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "distance_matrix", d)

    @property
    def n(self) -> int:
        return len(self.customers)

    def position(self, node: int) -> Tuple[float, float]:
        return self.depot_position if node == 0 else self.customers[node - 1].position

    def mass(self, customer_id: int) -> float:
        return self.customers[customer_id - 1].package_mass

    def distance(self, i: int, j: int) -> float:
        return float(self.distance_matrix[i, j])


def build_distance_matrix(depot: Tuple[float, float],
                          customers: Sequence[Customer]) -> np.ndarray:
    """Symmetric Euclidean distance matrix over depot (node 0) and customers."""
    pts = [depot] + [c.position for c in customers]
    for p in pts:
        if not (math.isfinite(p[0]) and math.isfinite(p[1])):
            raise ValueError("positions must be finite, got %r" % (p,))
    n1 = len(pts)
    d = np.zeros((n1, n1))
    for i in range(n1):
        for j in range(i + 1, n1):
            d[i, j] = d[j, i] = math.hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1])
    return d


def make_instance(depot: Tuple[float, float],
                  customers: Sequence[Customer],
                  obstacles: Optional[Sequence[Sequence[Tuple[float, float]]]] = None,
                  service_time: Optional[float] = None,
                  distance_override: Optional[np.ndarray] = None) -> Instance:
    """Build an Instance with a Euclidean matrix, applying no-fly detours if given."""
    from . import geometry  # local import; geometry pulls no heavy deps

    if distance_override is not None:
        d = np.asarray(distance_override, dtype=float)
    else:
        d = build_distance_matrix(depot, customers)
    obst = None
    if obstacles:
        obst = tuple(tuple((float(x), float(y)) for x, y in poly) for poly in obstacles)
        positions = [depot] + [c.position for c in customers]
        d = geometry.apply_no_fly_detours(d, positions, obst)
    return Instance(depot_position=tuple(depot), customers=tuple(customers),
                    distance_matrix=d, obstacles=obst, service_time=service_time)


# ---------------------------------------------------------------------------
# JSON file format (see README for the schema)

def instance_to_dict(instance: Instance) -> dict:
    cust = []
    for c in instance.customers:
        entry = {"id": c.id, "pos": [c.position[0], c.position[1]], "mass": c.package_mass}
        if c.package_volume is not None:
            entry["volume"] = c.package_volume
        if c.time_window is not None:
            entry["window"] = [c.time_window[0], c.time_window[1]]
        cust.append(entry)
    out = {"depot": [instance.depot_position[0], instance.depot_position[1]],
           "customers": cust}
    euclid = build_distance_matrix(instance.depot_position, instance.customers)
    if instance.obstacles is not None:
        out["obstacles"] = [[[x, y] for x, y in poly] for poly in instance.obstacles]
    elif not np.allclose(instance.distance_matrix, euclid, atol=1e-12, rtol=0.0):
        out["distance_override"] = instance.distance_matrix.tolist()
    if instance.service_time is not None:
        out["service_time"] = instance.service_time
    return out


def instance_from_dict(data: dict) -> Instance:
    customers = []
    for entry in data["customers"]:
        window = entry.get("window")
        customers.append(Customer(
            id=int(entry["id"]),
            position=(float(entry["pos"][0]), float(entry["pos"][1])),
            package_mass=float(entry["mass"]),
            package_volume=entry.get("volume"),
            time_window=tuple(window) if window is not None else None,
        ))
    customers.sort(key=lambda c: c.id)
    depot = (float(data["depot"][0]), float(data["depot"][1]))
    override = data.get("distance_override")
    return make_instance(
        depot, customers,
        obstacles=data.get("obstacles"),
        service_time=data.get("service_time"),
        distance_override=np.asarray(override, dtype=float) if override is not None else None,
    )


def load_instance(path: str) -> Instance:
    with open(path) as f:
        return instance_from_dict(json.load(f))


def save_instance(instance: Instance, path: str) -> None:
    with open(path, "w") as f:
        json.dump(instance_to_dict(instance), f, indent=2)
        f.write("\n")


def fleet_to_dict(fleet: Fleet) -> dict:
    return {"types": [
        {"id": t.type_id, "m0": t.self_mass, "el": t.takeoff_coeff, "ef": t.flight_coeff,
         "W": t.max_total_mass, "E": t.energy_capacity, "count": t.count,
         "V": t.volume_capacity, "speed": t.speed}
        for t in fleet.types]}


def fleet_from_dict(data: dict) -> Fleet:
    types = [DroneType(type_id=int(e["id"]), self_mass=float(e["m0"]),
                       takeoff_coeff=float(e["el"]), flight_coeff=float(e["ef"]),
                       max_total_mass=float(e["W"]), energy_capacity=float(e["E"]),
                       count=int(e.get("count", 1)), volume_capacity=e.get("V"),
                       speed=e.get("speed"))
             for e in data["types"]]
    return Fleet(types=tuple(types))


def load_fleet(path: str) -> Fleet:
    with open(path) as f:
        return fleet_from_dict(json.load(f))


def save_fleet(fleet: Fleet, path: str) -> None:
    with open(path, "w") as f:
        json.dump(fleet_to_dict(fleet), f, indent=2)
        f.write("\n")


# ---------------------------------------------------------------------------
# Builtin data

# 18-customer baseline benchmark: (x, y) in km and package mass in kg.
BASELINE_COORDS = (
    (0.88, -4.81), (1.99, 2.53), (-3.12, 1.02), (-4.56, 4.62), (-2.95, 1.64),
    (-3.94, 1.07), (2.27, -0.51), (1.79, -2.75), (-0.26, 1.70), (-0.52, 2.36),
    (-2.14, 0.05), (2.40, 3.49), (-2.61, -2.06), (-0.62, 1.77), (3.84, -0.79),
    (-2.11, 1.82), (2.85, -2.79), (2.59, 0.49),
)
BASELINE_MASSES = (
    0.89, 0.64, 1.94, 0.88, 0.92, 1.65, 1.70, 1.32, 1.07, 1.07,
    1.12, 1.67, 1.91, 0.66, 1.91, 1.70, 1.00, 0.97,
)

# Reference fleet: small drone (type 1) and large drone (type 2).
SMALL_DRONE = DroneType(type_id=1, self_mass=3.0, takeoff_coeff=0.3, flight_coeff=10.0,
                        max_total_mass=5.0, energy_capacity=300.0, count=3)
LARGE_DRONE = DroneType(type_id=2, self_mass=10.0, takeoff_coeff=1.0, flight_coeff=5.0,
                        max_total_mass=20.0, energy_capacity=1500.0, count=2)


def baseline_instance(n: int = 10) -> Instance:
    """The bundled 18-customer benchmark, truncated to its first n customers."""
    if not (1 <= n <= len(BASELINE_COORDS)):
        raise OutOfRange("n must be in 1..%d, got %d" % (len(BASELINE_COORDS), n))
    customers = [Customer(id=i + 1, position=BASELINE_COORDS[i], package_mass=BASELINE_MASSES[i])
                 for i in range(n)]
    return make_instance((0.0, 0.0), customers)


def example1_instance() -> Instance:
    """Three customers on a unit square; masses 1, 10, 1; unit leg distances."""
    customers = [
        Customer(id=1, position=(1.0, 0.0), package_mass=1.0),
        Customer(id=2, position=(1.0, 1.0), package_mass=10.0),
        Customer(id=3, position=(0.0, 1.0), package_mass=1.0),
    ]
    return make_instance((0.0, 0.0), customers)


def example2_instance() -> Instance:
    """Two customers, each 1 km from the depot and 1.8 km apart; masses 5 and 5."""
    y = math.sqrt(1.0 - 0.9 ** 2)
    customers = [
        Customer(id=1, position=(-0.9, y), package_mass=5.0),
        Customer(id=2, position=(0.9, y), package_mass=5.0),
    ]
    return make_instance((0.0, 0.0), customers)


def example_drone(count: int = 1) -> DroneType:
    """The dimensionless demo drone: m0=10, e_l=1, e_f=1, generous caps."""
    return DroneType(type_id=1, self_mass=10.0, takeoff_coeff=1.0, flight_coeff=1.0,
                     max_total_mass=100.0, energy_capacity=1e9, count=count)


def builtin_instance(spec: str) -> Instance:
    """Resolve a builtin instance name like 'appendix-d:10', 'example1', 'example2'."""
    name, _, arg = spec.partition(":")
    if name == "appendix-d":
        return baseline_instance(int(arg) if arg else 10)
    if name == "example1":
        return example1_instance()
    if name == "example2":
        return example2_instance()
    raise ValueError("unknown builtin instance %r" % (spec,))


def builtin_fleet(name: str) -> Fleet:
    """Builtin fleets: 'table3' (3 small + 2 large), 'large-only', 'small-only' (5 units)."""
    if name == "table3":
        return Fleet(types=(SMALL_DRONE, LARGE_DRONE))
    if name == "large-only":
        return Fleet(types=(DroneType(type_id=2, self_mass=10.0, takeoff_coeff=1.0,
                                      flight_coeff=5.0, max_total_mass=20.0,
                                      energy_capacity=1500.0, count=5),))
    if name == "small-only":
        return Fleet(types=(DroneType(type_id=1, self_mass=3.0, takeoff_coeff=0.3,
                                      flight_coeff=10.0, max_total_mass=5.0,
                                      energy_capacity=300.0, count=5),))
    raise ValueError("unknown builtin fleet %r" % (name,))


def generate_instance(n: int, area: Tuple[float, float] = (10.0, 10.0),
                      mass_range: Tuple[float, float] = (0.5, 2.0),
                      seed: int = 0) -> Instance:
    """Random instance: depot at the area center, uniform positions and masses."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = mass_range
    if not (0 < lo < hi):
        raise ValueError("mass_range must satisfy 0 < min < max")
    rng = random.Random(seed)
    w, h = area
    customers = [Customer(id=i + 1,
                          position=(rng.uniform(-w / 2, w / 2), rng.uniform(-h / 2, h / 2)),
                          package_mass=rng.uniform(lo, hi))
                 for i in range(n)]
    return make_instance((0.0, 0.0), customers)

"""Energy computations: per-leg law, tour weight dynamics, power models.

Routing-path units: Wh, km, kg. The standalone power-model calculators use
SI units (W, J, m, s, kg) and are kept separate from the routing path; the
linear per-leg law is what the optimizer consumes.
"""

import math
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

from .model import DroneType, Instance


class UnknownCustomer(KeyError):
    """Tour references a customer id outside the instance."""


class UnknownSpeed(KeyError):
    """Lift-to-drag ratio undefined at the requested speed."""


class MissingParameter(ValueError):
    """A power model was asked for without one of its required parameters."""

    def __init__(self, name: str, model: str):
        self.name = name
        self.model = model
        super().__init__("power model %r requires parameter %r" % (model, name))


@dataclass(frozen=True)
class LegEnergyParams:
    """Coefficients of the linear leg law: energy = (takeoff + flight * d) * mass."""

    takeoff_coeff: float
    flight_coeff: float

    def __post_init__(self):
        if self.takeoff_coeff < 0 or not (self.flight_coeff > 0):
            raise ValueError("takeoff_coeff must be >= 0 and flight_coeff > 0")


def leg_energy(params: LegEnergyParams, distance_km: float, total_mass_kg: float) -> float:
    """Energy in Wh for one flight leg at constant total mass."""
    if distance_km < 0:
        raise ValueError("distance must be >= 0")
    if not (total_mass_kg > 0):
        raise ValueError("total mass must be > 0")
    return (params.takeoff_coeff + params.flight_coeff * distance_km) * total_mass_kg


def leg_params_for(drone_type: DroneType, instance: Instance, i: int, j: int) -> LegEnergyParams:
    """Coefficients for leg i -> j, honoring per-leg overrides when present."""
    el, ef = drone_type.takeoff_coeff, drone_type.flight_coeff
    if instance.leg_coeff_overrides:
        ovr = instance.leg_coeff_overrides.get(drone_type.type_id)
        if ovr is not None:
            if ovr.takeoff is not None:
                el = float(ovr.takeoff[i, j])
            if ovr.flight is not None:
                ef = float(ovr.flight[i, j])
    return LegEnergyParams(takeoff_coeff=el, flight_coeff=ef)


@dataclass(frozen=True)
class WeightProfile:
    """Total mass upon departure from each node along a tour.

    entries[0] is the depot departure (self mass + all payload); the last
    entry is the final customer departure at self mass.
    """

    entries: Tuple[Tuple[int, float], ...]

    def masses(self) -> Tuple[float, ...]:
        return tuple(m for _, m in self.entries)


def _check_visits(visits: Sequence[int], instance: Instance) -> None:
    seen = set()
    for c in visits:
        if not (1 <= c <= instance.n):
            raise UnknownCustomer("customer %r not in instance (n=%d)" % (c, instance.n))
        if c in seen:
            raise ValueError("tour visits customer %d twice" % c)
        seen.add(c)


def tour_weight_profile(visits: Sequence[int], drone_type: DroneType,
                        instance: Instance) -> WeightProfile:
    """Departure masses along depot -> visits -> depot."""
    _check_visits(visits, instance)
    w = drone_type.self_mass + sum(instance.mass(c) for c in visits)
    entries = [(0, w)]
    for c in visits:
        w -= instance.mass(c)
        entries.append((c, w))
    return WeightProfile(entries=tuple(entries))


def tour_energy(visits: Sequence[int], drone_type: DroneType, instance: Instance) -> float:
    """Total Wh of the tour depot -> visits -> depot (empty tour: 0)."""
    if not visits:
        return 0.0
    profile = tour_weight_profile(visits, drone_type, instance)
    nodes = [0] + list(visits) + [0]
    total = 0.0
    for (node, mass), nxt in zip(profile.entries, nodes[1:]):
        params = leg_params_for(drone_type, instance, node, nxt)
        total += leg_energy(params, instance.distance(node, nxt), mass)
    return total


def tour_distance(visits: Sequence[int], instance: Instance) -> float:
    """Total km of the tour depot -> visits -> depot (empty tour: 0)."""
    if not visits:
        return 0.0
    _check_visits(visits, instance)
    nodes = [0] + list(visits) + [0]
    return sum(instance.distance(a, b) for a, b in zip(nodes, nodes[1:]))


def roundtrip_energy(drone_type: DroneType, package_mass: float,
                     one_way_distance: float) -> float:
    """Wh for a dedicated out-and-back delivery of one package."""
    if one_way_distance < 0 or package_mass < 0:
        raise ValueError("distance and mass must be >= 0")
    return ((drone_type.takeoff_coeff + drone_type.flight_coeff * one_way_distance)
            * (2.0 * drone_type.self_mass + package_mass))


def fleet_energy_gap(large: DroneType, small: DroneType,
                     package_mass: float, distance: float) -> float:
    """Round-trip energy of the large drone minus the small one (negative: large wins)."""
    return (roundtrip_energy(large, package_mass, distance)
            - roundtrip_energy(small, package_mass, distance))


@dataclass(frozen=True)
class CrossoverResult:
    """Root analysis of the round-trip energy gap, which is affine in distance.

    distance is the break-even distance (None when the gap keeps one sign on
    d >= 0); zero_gap flags an identically-zero gap (e.g. identical types).
    intercept/slope are the gap's affine coefficients in d.
    """

    distance: Optional[float]
    zero_gap: bool
    intercept: float
    slope: float


def crossover_distance(large: DroneType, small: DroneType,
                       package_mass: float) -> CrossoverResult:
    """Distance at which the large drone's round trip becomes as cheap as the small one's."""
    m = package_mass
    a = (2.0 * (large.takeoff_coeff * large.self_mass - small.takeoff_coeff * small.self_mass)
         + (large.takeoff_coeff - small.takeoff_coeff) * m)
    b = (2.0 * (large.flight_coeff * large.self_mass - small.flight_coeff * small.self_mass)
         + (large.flight_coeff - small.flight_coeff) * m)
    if b == 0.0:
        return CrossoverResult(distance=None, zero_gap=(a == 0.0), intercept=a, slope=b)
    root = -a / b
    if root < 0.0:
        return CrossoverResult(distance=None, zero_gap=False, intercept=a, slope=b)
    return CrossoverResult(distance=root, zero_gap=False, intercept=a, slope=b)


# ---------------------------------------------------------------------------
# Standalone power-model calculators (SI units)

@dataclass(frozen=True)
class PowerModelParams:
    """Inputs for the level-flight and hover power calculators (SI units)."""

    tare_mass: float = 0.0          # kg, airframe without battery/load
    battery_mass: float = 0.0       # kg
    load_mass: float = 0.0          # kg
    gravity: float = 9.81           # m/s^2
    lift_to_drag: Optional[Mapping[float, float]] = None  # speed (m/s) -> ratio
    lift_to_drag_opt: Optional[float] = None              # best ratio over speeds
    transfer_efficiency: float = 1.0                      # battery-to-propeller, (0, 1]
    air_density: Optional[float] = None                   # kg/m^3
    disc_area: Optional[float] = None                     # m^2 per rotor disc
    rotor_count: Optional[int] = None
    alpha: Optional[float] = None                         # W/kg, linear hover model
    beta: Optional[float] = None                          # W, linear hover model
    power_constant: Optional[float] = None                # c_p hover model

    def __post_init__(self):
        if min(self.tare_mass, self.battery_mass, self.load_mass) < 0:
            raise ValueError("masses must be >= 0")
        if not (self.gravity > 0):
            raise ValueError("gravity must be > 0")
        if not (0 < self.transfer_efficiency <= 1):
            raise ValueError("transfer_efficiency must be in (0, 1]")

    @property
    def total_mass(self) -> float:
        return self.tare_mass + self.battery_mass + self.load_mass


def level_flight_power(params: PowerModelParams, speed: float) -> float:
    """Watts to sustain level flight at the given speed (lift-to-drag lookup)."""
    if params.lift_to_drag is None or speed not in params.lift_to_drag:
        raise UnknownSpeed("lift-to-drag ratio undefined at speed %r" % (speed,))
    nu = params.lift_to_drag[speed]
    if not (nu > 0):
        raise ValueError("lift-to-drag ratio must be > 0 at speed %r" % (speed,))
    return params.total_mass * params.gravity * speed / nu


def level_flight_energy(params: PowerModelParams, distance: float) -> float:
    """Joules to cover a distance at the best lift-to-drag ratio.

    Speed cancels out of power x time, so the result depends only on the
    optimal ratio and the transfer efficiency.
    """
    if distance < 0:
        raise ValueError("distance must be >= 0")
    nu_star = params.lift_to_drag_opt
    if nu_star is None:
        if not params.lift_to_drag:
            raise MissingParameter("lift_to_drag_opt", "level_flight")
        nu_star = max(params.lift_to_drag.values())
    return params.total_mass * params.gravity * distance / (nu_star * params.transfer_efficiency)


def hover_power(params: PowerModelParams, model: str = "physics") -> float:
    """Watts to hover, per the chosen closed form: 'physics', 'linear' or 'cp'."""
    m = params.total_mass
    if model == "physics":
        for name in ("air_density", "disc_area", "rotor_count"):
            if getattr(params, name) is None:
                raise MissingParameter(name, model)
        return m ** 1.5 * math.sqrt(
            params.gravity ** 3 / (2.0 * params.air_density * params.disc_area * params.rotor_count))
    if model == "linear":
        for name in ("alpha", "beta"):
            if getattr(params, name) is None:
                raise MissingParameter(name, model)
        return params.alpha * m + params.beta
    if model == "cp":
        if params.power_constant is None:
            raise MissingParameter("power_constant", model)
        return params.power_constant * (m * params.gravity) ** 1.5
    raise ValueError("unknown hover model %r" % (model,))


def derive_flight_coeff(params: PowerModelParams) -> float:
    """Level-flight coefficient in Wh/(kg*km) implied by the SI-unit model.

    Energy per meter per kilogram is g / (nu* eta); scaled by 1000 m/km and
    1/3600 J/Wh.
    """
    nu_star = params.lift_to_drag_opt
    if nu_star is None:
        raise MissingParameter("lift_to_drag_opt", "level_flight")
    joule_per_m_kg = params.gravity / (nu_star * params.transfer_efficiency)
    return joule_per_m_kg * 1000.0 / 3600.0


# Published level-flight coefficient presets (Wh/(kg*km)) for a small and a
# large reference airframe under two fitted models.
FLIGHT_COEFF_PRESETS: Dict[str, Dict[str, float]] = {
    "LD": {"small": 4.20, "large": 3.99},
    "R2": {"small": 10.97, "large": 8.81},
}

"""Tour- and solution-level constraint checks.

Single authority for capacity semantics: all bounds are inclusive, and
comparisons carry an absolute slack of FEAS_TOL to absorb float noise
(small enough never to blur real violations like 5.14 kg > 5 kg).
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .energy import tour_energy
from .model import DroneType, Fleet, Instance

FEAS_TOL = 1e-9


class MissingVolume(ValueError):
    """Volume cap set but a tour customer has no package volume."""


class MissingTemporalData(ValueError):
    """Time-window check without drone speed or customer windows."""


@dataclass(frozen=True)
class Violation:
    constraint: str
    tour: Optional[Tuple[int, int]]  # (type_id, unit_index) when tour-level
    measured: float
    bound: float

    def to_dict(self) -> dict:
        return {"constraint": self.constraint,
                "tour": list(self.tour) if self.tour else None,
                "measured": self.measured, "bound": self.bound}


@dataclass(frozen=True)
class FeasibilityReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def feasible(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"feasible": self.feasible,
                "violations": [v.to_dict() for v in self.violations]}

    @staticmethod
    def merge(reports: Sequence["FeasibilityReport"]) -> "FeasibilityReport":
        out: List[Violation] = []
        for r in reports:
            out.extend(r.violations)
        return FeasibilityReport(violations=tuple(out))


def _report(tag: str, tour: Optional[Tuple[int, int]], measured: float,
            bound: float) -> FeasibilityReport:
    if measured <= bound + FEAS_TOL:
        return FeasibilityReport()
    return FeasibilityReport(violations=(Violation(tag, tour, measured, bound),))


def check_weight(visits: Sequence[int], drone_type: DroneType, instance: Instance,
                 tour: Optional[Tuple[int, int]] = None) -> FeasibilityReport:
    """Launch mass (self mass + all payload) against the type's weight cap."""
    launch = drone_type.self_mass + sum(instance.mass(c) for c in visits)
    return _report("14", tour, launch, drone_type.max_total_mass)


def check_energy(visits: Sequence[int], drone_type: DroneType, instance: Instance,
                 tour: Optional[Tuple[int, int]] = None) -> FeasibilityReport:
    """Tour energy against the type's battery capacity."""
    return _report("15", tour, tour_energy(visits, drone_type, instance),
                   drone_type.energy_capacity)


def check_volume(visits: Sequence[int], drone_type: DroneType, instance: Instance,
                 tour: Optional[Tuple[int, int]] = None) -> FeasibilityReport:
    """Summed package volumes against the type's compartment cap (skipped if unset)."""
    if drone_type.volume_capacity is None:
        return FeasibilityReport()
    total = 0.0
    for c in visits:
        vol = instance.customers[c - 1].package_volume
        if vol is None:
            raise MissingVolume("customer %d has no package volume" % c)
        total += vol
    return _report("C1", tour, total, drone_type.volume_capacity)


def service_start_times(visits: Sequence[int], drone_type: DroneType,
                        instance: Instance) -> List[float]:
    """Earliest service start per visit: depart depot at 0, wait for windows."""
    if drone_type.speed is None:
        raise MissingTemporalData("drone type %d has no speed" % drone_type.type_id)
    service = instance.service_time or 0.0
    times = []
    t = 0.0
    prev = 0
    for c in visits:
        window = instance.customers[c - 1].time_window
        if window is None:
            raise MissingTemporalData("customer %d has no time window" % c)
        arrival = t + instance.distance(prev, c) / drone_type.speed
        start = max(window[0], arrival)
        times.append(start)
        t = start + service
        prev = c
    return times


def check_time_windows(visits: Sequence[int], drone_type: DroneType, instance: Instance,
                       tour: Optional[Tuple[int, int]] = None) -> FeasibilityReport:
    """Earliest-service simulation; waiting before a window opens is free."""
    violations = []
    for c, start in zip(visits, service_start_times(visits, drone_type, instance)):
        due = instance.customers[c - 1].time_window[1]
        if start > due + FEAS_TOL:
            violations.append(Violation("C3", tour, start, due))
    return FeasibilityReport(violations=tuple(violations))


def check_tour(visits: Sequence[int], drone_type: DroneType, instance: Instance,
               tour: Optional[Tuple[int, int]] = None,
               enable_volume: bool = False,
               enable_time_windows: bool = False) -> FeasibilityReport:
    reports = [check_weight(visits, drone_type, instance, tour),
               check_energy(visits, drone_type, instance, tour)]
    if enable_volume:
        reports.append(check_volume(visits, drone_type, instance, tour))
    if enable_time_windows:
        reports.append(check_time_windows(visits, drone_type, instance, tour))
    return FeasibilityReport.merge(reports)


def check_solution(solution, fleet: Fleet, instance: Instance,
                   options=None) -> FeasibilityReport:
    """Aggregate feasibility of a full solution.

    Violation tags: per-tour caps as in check_tour, plus "6" (customer not
    covered exactly once, or unknown id), "8" (a drone unit hosting more
    than one tour, or an unknown unit), "10" (a tour object with no
    visits), "16" (consecutive duplicate visit, i.e. a self-loop).
    """
    enable_volume = bool(getattr(options, "enable_volume", False))
    enable_tw = bool(getattr(options, "enable_time_windows", False))

    violations: List[Violation] = []
    counts = {c.id: 0 for c in instance.customers}
    unit_tours = {}
    for t in solution.tours:
        key = (t.drone_type, t.unit_index)
        unit_tours[key] = unit_tours.get(key, 0) + 1
        if not t.visits:
            violations.append(Violation("10", key, 0.0, 1.0))
            continue
        for a, b in zip(t.visits, t.visits[1:]):
            if a == b:
                violations.append(Violation("16", key, 1.0, 0.0))
        for c in t.visits:
            if c in counts:
                counts[c] += 1
            else:
                violations.append(Violation("6", key, float(c), float(instance.n)))

    for cid, k in sorted(counts.items()):
        if k != 1:
            violations.append(Violation("6", None, float(k), 1.0))

    known_units = set(fleet.units())
    for key, k in sorted(unit_tours.items()):
        if key not in known_units:
            violations.append(Violation("8", key, float(k), 0.0))
        elif k > 1:
            violations.append(Violation("8", key, float(k), 1.0))

    reports = [FeasibilityReport(violations=tuple(violations))]
    for t in solution.tours:
        if not t.visits:
            continue
        try:
            dtype = fleet.type_by_id(t.drone_type)
        except KeyError:
            continue  # already flagged under tag 8
        if all(1 <= c <= instance.n for c in t.visits) and len(set(t.visits)) == len(t.visits):
            reports.append(check_tour(t.visits, dtype, instance,
                                      tour=(t.drone_type, t.unit_index),
                                      enable_volume=enable_volume,
                                      enable_time_windows=enable_tw))
    return FeasibilityReport.merge(reports)

"""Solver-facing types: tours, solutions, options, results."""

import os
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

OBJECTIVES = ("min_energy", "min_distance")
TIE_BREAKS = ("min_energy", "lexicographic")
DISPATCH_POLICIES = ("required", "optional")


class Infeasible(ValueError):
    """No assignment satisfies the caps (and the dispatch policy)."""


class TooLarge(ValueError):
    """Instance exceeds the brute-force enumeration guard."""


@dataclass(frozen=True)
class Tour:
    """One drone unit's depot-to-depot trip: type, unit and visit order."""

    drone_type: int
    unit_index: int
    visits: Tuple[int, ...]
    energy: float = 0.0
    distance: float = 0.0

    def to_dict(self) -> dict:
        return {"type": self.drone_type, "unit": self.unit_index,
                "visits": list(self.visits), "energy": self.energy,
                "distance": self.distance}


@dataclass(frozen=True)
class Solution:
    """A set of tours covering every customer exactly once."""

    tours: Tuple[Tour, ...]
    total_energy: float
    total_distance: float

    @property
    def per_tour_energy(self) -> Dict[Tuple[int, int], float]:
        return {(t.drone_type, t.unit_index): t.energy for t in self.tours}

    def customer_sets(self) -> Tuple[Tuple[int, Tuple[int, ...]], ...]:
        """Canonical (type, sorted customers) signature, for comparisons."""
        return tuple(sorted((t.drone_type, tuple(sorted(t.visits))) for t in self.tours))

    def to_dict(self) -> dict:
        return {"tours": [t.to_dict() for t in self.tours],
                "total_energy": self.total_energy,
                "total_distance": self.total_distance}


def _default_threads() -> int:
    env = os.environ.get("GDRP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


@dataclass(frozen=True)
class SolveOptions:
    """Knobs for solve()/brute_force().

    dispatch "required" makes every fleet unit fly a non-empty tour (the
    behavior the reference experiments embody); "optional" lets drones
    stay at the depot. tie_break applies to min_distance runs: among
    distance-optimal solutions, "min_energy" re-optimizes energy while
    "lexicographic" keeps the search's deterministic first find.
    """

    objective: str = "min_energy"
    tie_break: str = "min_energy"
    dispatch: str = "required"
    time_limit_s: float = 600.0
    thread_count: Optional[int] = None
    enable_volume: bool = False
    enable_time_windows: bool = False
    report_gap: bool = True
    use_pruning: bool = True

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError("objective must be one of %r" % (OBJECTIVES,))
        if self.tie_break not in TIE_BREAKS:
            raise ValueError("tie_break must be one of %r" % (TIE_BREAKS,))
        if self.dispatch not in DISPATCH_POLICIES:
            raise ValueError("dispatch must be one of %r" % (DISPATCH_POLICIES,))
        if not (self.time_limit_s > 0):
            raise ValueError("time_limit_s must be > 0")
        if self.thread_count is None:
            object.__setattr__(self, "thread_count", _default_threads())
        elif self.thread_count < 1:
            raise ValueError("thread_count must be >= 1")

    def with_(self, **kwargs) -> "SolveOptions":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a solve: incumbent, optimality certificate and search stats."""

    best: Optional[Solution]
    proven_optimal: bool
    relative_gap: float
    nodes_explored: int
    wall_time_s: float

    def to_dict(self) -> dict:
        # wall time is deliberately omitted: outputs stay byte-identical
        # across runs with identical inputs
        out = {"proven_optimal": self.proven_optimal, "gap": self.relative_gap}
        if self.best is not None:
            out.update(self.best.to_dict())
        else:
            out.update({"tours": [], "total_energy": None, "total_distance": None})
        return out

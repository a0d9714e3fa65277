"""Exact solvers for the green drone routing problem."""

from .brute import brute_force
from .engine import active_engine, compiled_available
from .search import evaluate_fixed_routes, solve
from .types import (Infeasible, Solution, SolveOptions, SolveResult, TooLarge,
                    Tour)

__all__ = [
    "solve", "brute_force", "evaluate_fixed_routes",
    "Tour", "Solution", "SolveOptions", "SolveResult",
    "Infeasible", "TooLarge", "active_engine", "compiled_available",
]

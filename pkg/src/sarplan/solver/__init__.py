"""Solvers for single fleet-size planning instances."""

from __future__ import annotations

from ..rp_model import RpInstance
from .base import (
    AUTO_EXACT_LIMIT,
    FleetBound,
    SolveBudget,
    SolveOutcome,
    Status,
    counting_report,
    fleet_lower_bound,
)
from .exact import solve_exact
from .heuristic import greedy_paths, solve_heuristic
from .oracle import brute_force_oracle


def resolve_mode(inst: RpInstance, mode: str) -> str:
    if mode == "auto":
        return "exact" if inst.size <= AUTO_EXACT_LIMIT else "heuristic"
    return mode


def solve(inst: RpInstance, budget: SolveBudget | None = None, backend: str | None = None) -> SolveOutcome:
    """Solve one instance in the budget's mode (``auto`` picks by instance size)."""
    budget = budget or SolveBudget()
    if resolve_mode(inst, budget.mode) == "exact":
        return solve_exact(inst, budget, backend)
    return solve_heuristic(inst, budget)


__all__ = [
    "AUTO_EXACT_LIMIT",
    "FleetBound",
    "SolveBudget",
    "SolveOutcome",
    "Status",
    "brute_force_oracle",
    "counting_report",
    "fleet_lower_bound",
    "greedy_paths",
    "resolve_mode",
    "solve",
    "solve_exact",
    "solve_heuristic",
]

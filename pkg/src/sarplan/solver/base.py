from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from ..energy import EnergyProfile
from ..grid import GridMap
from ..rp_model import RobotSpec, RpInstance, Solution, coverage_target

AUTO_EXACT_LIMIT = 10_000


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    PROVABLY_INFEASIBLE = "ProvablyInfeasible"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class SolveBudget:
    max_nodes: int = 5_000_000
    wall_limit: float = 60.0
    mode: str = "auto"  # exact | heuristic | auto
    workers: int = 1
    seed: int = 0
    restarts: int = 0

    def __post_init__(self) -> None:
        if self.max_nodes <= 0 or not self.wall_limit > 0:
            raise ValueError("solver limits must be positive")
        if self.mode not in ("exact", "heuristic", "auto"):
            raise ValueError(f"unknown solver mode {self.mode!r}")
        if self.workers < 1 or self.restarts < 0:
            raise ValueError("workers must be >= 1 and restarts >= 0")


@dataclass
class SolveOutcome:
    status: Status
    solution: Solution | None = None
    bound: int = 0
    stats: dict = field(default_factory=dict)
    reason: str = ""
    # plan that respects every constraint except the coverage target
    best_effort: Solution | None = None
    budget_exhausted: bool = False

    @property
    def objective(self) -> int | None:
        return None if self.solution is None else self.solution.objective

    @property
    def solved(self) -> bool:
        return self.status in (Status.OPTIMAL, Status.FEASIBLE)


@dataclass(frozen=True)
class FleetBound:
    robots: int | None  # None: no fleet size can work
    coverage: int | None
    energy: int | None
    reason: str


def _per_robot_gain(inst: RpInstance) -> int | None:
    """Most new cells one robot can add before its battery forces it to idle.

    ``None`` when the robot cannot even survive the horizon idling.
    """
    costs = inst.costs
    T = inst.horizon
    bat = inst.robots[0].initial_battery_mj
    low = costs.min_epoch_cost(0)
    spare = bat - (T - 1) * low
    if spare < 0:
        return None
    extra = costs.min_gain_cost(0) - low
    cap = T - 1 if extra <= 0 else min(T - 1, spare // extra)
    return cap


def _robots_needed(need: int, gain: int, co_located: bool) -> int | None:
    if co_located:
        if need <= 1:
            return 1
        return None if gain == 0 else math.ceil((need - 1) / gain)
    return max(1, math.ceil(need / (gain + 1)))


def fleet_lower_bound(
    grid: GridMap,
    kappa: float,
    horizon: int,
    profile: EnergyProfile,
    *,
    co_located: bool = True,
    epoch_duration: float = 10.0,
    speed: float = 1.0,
    initial_battery: float | None = None,
) -> FleetBound:
    """Smallest fleet that counting and energy arguments cannot rule out.

    Coverage: every robot adds at most one new cell per epoch. Energy: every
    new cell costs at least the cheapest exploring epoch, after reserving the
    cheapest possible epoch for the rest of the horizon.
    """
    need = coverage_target(kappa, grid.total_cells)
    probe = RpInstance(grid, horizon, epoch_duration, (RobotSpec(0, profile, grid.base_station, initial_battery),),
                       kappa, speed)
    cov = _robots_needed(need, horizon - 1, co_located)
    gain = _per_robot_gain(probe)
    if gain is None:
        return FleetBound(None, cov, None,
                          f"battery cannot sustain {horizon} epochs even at the cheapest per-epoch draw")
    energy = _robots_needed(need, gain, co_located)
    if cov is None or energy is None:
        return FleetBound(None, cov, energy, f"no robot can reach a new cell, but {need} cells are required")
    robots = max(1, cov, energy)
    binding = "coverage" if cov >= energy else "energy"
    return FleetBound(robots, cov, energy, f"{binding} bound: at least {robots} robot(s) for {need} cells")


def counting_report(need: int, robots: int, horizon: int, co_located: bool = True) -> str:
    """Human-readable statement of the one-new-cell-per-epoch bound."""
    if co_located:
        cap = 1 + robots * (horizon - 1)
        rel = "<" if cap < need else ">="
        return f"1 + {robots}x{horizon - 1} = {cap} {rel} {need} cells"
    cap = robots * horizon
    rel = "<" if cap < need else ">="
    return f"{robots}x{horizon} = {cap} {rel} {need} cells"

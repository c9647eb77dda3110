"""Fleet-size ladder: grow the fleet one robot at a time until a plan qualifies."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .energy import EnergyProfile
from .grid import Cell, GridMap, build_grid
from .rp_model import RobotSpec, RpInstance, Solution
from .solver import SolveBudget, Status, counting_report, fleet_lower_bound, greedy_paths, resolve_mode, solve
from .validator import replay

log = logging.getLogger("sarplan.planner")

PLANNED = "Planned"
INFEASIBLE = "InfeasibleWithinTFS"


@dataclass(frozen=True)
class MissionRequest:
    area_width: float
    area_height: float
    err: float
    trt: float  # seconds
    tfs: int
    profile: EnergyProfile
    epoch_duration: float = 10.0
    speed: float = 1.0
    base_station: tuple[int, int] = (0, 0)
    start_cells: tuple[tuple[int, int], ...] = ()
    initial_battery: float | None = None
    terrain_factor: float = 1.0

    def __post_init__(self) -> None:
        if self.tfs < 1:
            raise ValueError("tfs must be at least 1")
        if not 0 < self.err <= 1:
            raise ValueError("err must lie in (0, 1]")
        if self.trt < self.epoch_duration:
            raise ValueError("trt must cover at least one epoch")

    @property
    def horizon(self) -> int:
        return max(1, math.floor(self.trt / self.epoch_duration + 1e-9))

    def grid(self) -> GridMap:
        return build_grid(self.area_width, self.area_height, self.speed, self.epoch_duration, self.base_station,
                          self.terrain_factor)

    def start_of(self, r: int) -> Cell:
        if r < len(self.start_cells):
            return Cell(*self.start_cells[r])
        return Cell(*self.base_station)

    def co_located(self, n_robots: int) -> bool:
        return len({self.start_of(r) for r in range(n_robots)}) == 1

    def instance(self, n_robots: int, grid: GridMap | None = None) -> RpInstance:
        grid = grid or self.grid()
        robots = tuple(RobotSpec(r, self.profile, self.start_of(r), self.initial_battery) for r in range(n_robots))
        return RpInstance(grid, self.horizon, self.epoch_duration, robots, self.err, self.speed)


@dataclass
class MissionPlanResult:
    status: str
    fleet_size: int
    horizon: int
    epoch_duration: float
    n_cells: int
    target_cells: int
    solution: Solution | None = None
    completion_epochs: int | None = None
    expected_explored_cells: int = 0
    paths: list[list[Cell]] = field(default_factory=list)
    battery: list[list[int]] = field(default_factory=list)  # millijoules
    explored_series: list[int] = field(default_factory=list)
    ladder: list[tuple[int, str]] = field(default_factory=list)
    reason: str = ""
    mode: str = ""

    @property
    def explored_rate(self) -> float:
        return self.expected_explored_cells / self.n_cells

    def to_json(self) -> dict:
        """Plain-JSON form; deterministic for identical inputs."""
        return {
            "status": self.status,
            "fleet_size": self.fleet_size,
            "completion_epochs": self.completion_epochs,
            "completion_time_s": None if self.completion_epochs is None else self.completion_epochs * self.epoch_duration,
            "expected_explored_cells": self.expected_explored_cells,
            "explored_rate": round(self.explored_rate, 6),
            "target_cells": self.target_cells,
            "total_cells": self.n_cells,
            "horizon_epochs": self.horizon,
            "epoch_duration_s": self.epoch_duration,
            "mode": self.mode,
            "reason": self.reason,
            "ladder": [{"robots": r, "status": s} for r, s in self.ladder],
            "paths": [[[t, c.a, c.b] for t, c in enumerate(path)] for path in self.paths],
            "battery_J": [[mj / 1000 for mj in row] for row in self.battery],
            "explored_pct": [round(100.0 * c / self.n_cells, 4) for c in self.explored_series],
        }


class PlanningInconclusive(RuntimeError):
    def __init__(self, message: str, ladder: Sequence[tuple[int, str]]):
        super().__init__(message)
        self.ladder = list(ladder)


def _result(req: MissionRequest, inst: RpInstance, sol: Solution | None, status: str, ladder, reason: str,
            mode: str) -> MissionPlanResult:
    res = MissionPlanResult(status, inst.n_robots, inst.horizon, inst.epoch_duration, inst.n_cells, inst.target,
                            ladder=list(ladder), reason=reason, mode=mode)
    if sol is None:
        return res
    g = inst.grid
    cov = [int(c) for c in sol.coverage()]
    res.solution = sol
    res.paths = [[g.cell(c) for c in p] for p in sol.paths]
    res.battery = [[int(b) for b in row] for row in sol.battery]
    res.explored_series = cov
    res.expected_explored_cells = cov[-1]
    if cov[-1] >= inst.target:
        res.completion_epochs = sol.objective + 1
    return res


def fallback_plan(inst: RpInstance) -> Solution | None:
    """Greedy plan that ignores the coverage target; ``None`` if it overdraws a battery."""
    sol = Solution.from_paths(inst, greedy_paths(inst))
    return sol if (sol.battery >= 0).all() else None


def _pick_best(cands: list[tuple[RpInstance, Solution]]):
    # largest explored share first, then fewer epochs
    def key(item):
        inst, sol = item
        return (-int(sol.coverage()[-1]), sol.objective, inst.n_robots)

    return min(cands, key=key) if cands else None


def plan_mission(req: MissionRequest, budget: SolveBudget | None = None) -> MissionPlanResult:
    """Smallest fleet (up to ``req.tfs``) whose plan meets the coverage target in time.

    Starts at the fleet lower bound and adds one robot per iteration. If no
    fleet qualifies, returns the best fallback plan found along the way.
    Raises :class:`PlanningInconclusive` when a solver runs out of budget
    before answering.
    """
    budget = budget or SolveBudget()
    grid = req.grid()
    horizon = req.horizon
    lb = fleet_lower_bound(grid, req.err, horizon, req.profile, co_located=req.co_located(req.tfs),
                           epoch_duration=req.epoch_duration, speed=req.speed, initial_battery=req.initial_battery)
    ladder: list[tuple[int, str]] = []
    attempts: list[tuple[RpInstance, Solution]] = []
    reason = ""
    first = 1 if lb.robots is None else max(1, lb.robots)
    if lb.robots is None or lb.robots > req.tfs:
        inst = req.instance(req.tfs, grid)
        reason = lb.reason
        if req.co_located(req.tfs) and lb.coverage is not None and lb.coverage > req.tfs:
            reason = "counting bound: " + counting_report(inst.target, req.tfs, horizon)
        log.info("fleet lower bound %s exceeds tfs=%d: %s", lb.robots, req.tfs, reason)
        ladder.append((req.tfs, Status.PROVABLY_INFEASIBLE.value))
        sol = fallback_plan(inst)
        if sol is not None:
            attempts.append((inst, sol))
    else:
        for n in range(first, req.tfs + 1):
            inst = req.instance(n, grid)
            mode = resolve_mode(inst, budget.mode)
            out = solve(inst, budget)
            ladder.append((n, out.status.value))
            log.info("fleet %d: %s %s", n, out.status.value, out.reason)
            if out.solved:
                trace = replay(inst, [[inst.grid.cell(c) for c in p] for p in out.solution.paths])
                if trace.ok:
                    return _result(req, inst, out.solution, PLANNED, ladder, out.reason, mode)
                raise AssertionError(f"solver returned a plan the validator rejects: {trace.violations[:3]}")
            if out.budget_exhausted:
                raise PlanningInconclusive(f"solver budget exhausted at fleet size {n}: {out.reason}", ladder)
            reason = out.reason
            sol = out.best_effort or fallback_plan(inst)
            if sol is not None:
                attempts.append((inst, sol))
    best = _pick_best(attempts)
    if best is None:
        inst = req.instance(req.tfs, grid)
        return _result(req, inst, None, INFEASIBLE, ladder, reason, resolve_mode(inst, budget.mode))
    inst, sol = best
    return _result(req, inst, sol, INFEASIBLE, ladder, reason, resolve_mode(inst, budget.mode))


@dataclass
class SweepRow:
    robots: int
    status: str
    met: bool
    explored_cells: list[int]
    n_cells: int
    solution: Solution | None = None
    error: str = ""

    @property
    def curve(self) -> list[float]:
        return [100.0 * c / self.n_cells for c in self.explored_cells]


def sweep_fleet(req: MissionRequest, r_min: int, r_max: int, budget: SolveBudget | None = None) -> list[SweepRow]:
    """Explored-percentage series for every fleet size in ``[r_min, r_max]``.

    Sizes that cannot meet the target still get a curve from the fallback
    plan; failures are recorded per row and never stop the sweep.
    """
    if r_min < 1 or r_min > r_max:
        raise ValueError("need 1 <= r_min <= r_max")
    budget = budget or SolveBudget()
    grid = req.grid()
    rows = []
    for n in range(r_min, r_max + 1):
        inst = req.instance(n, grid)
        try:
            out = solve(inst, budget)
            sol = out.solution if out.solved else (out.best_effort or fallback_plan(inst))
            cells = [int(c) for c in sol.coverage()] if sol is not None else []
            rows.append(SweepRow(n, out.status.value, out.solved, cells, inst.n_cells, sol))
        except Exception as exc:  # keep sweeping past a broken fleet size
            log.exception("sweep failed at fleet size %d", n)
            rows.append(SweepRow(n, "error", False, [], inst.n_cells, error=str(exc)))
    return rows

"""Epoch-by-epoch replay of a path plan.

Works only from the robot paths and the instance: exploration state, gated
energy and batteries are rebuilt from scratch, so nothing a solver or the MILP
builder computed can certify itself.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .energy import EpochCost, Move, epoch_energy
from .grid import Cell
from .rp_model import RpInstance, Violation


@dataclass(frozen=True)
class RobotStep:
    cell: Cell
    battery: int  # millijoules at the end of the epoch
    cost: EpochCost  # energy drawn to get here; zero at epoch 0


@dataclass
class ExplorationTrace:
    target: int
    n_cells: int
    explored_cells: list[int] = field(default_factory=list)
    steps: list[list[RobotStep]] = field(default_factory=list)  # [robot][epoch]
    violations: list[Violation] = field(default_factory=list)

    @property
    def explored_pct(self) -> list[float]:
        return [100.0 * c / self.n_cells for c in self.explored_cells]

    @property
    def completion_epoch(self) -> int | None:
        """First epoch (0-based) at which the coverage target holds."""
        for t, c in enumerate(self.explored_cells):
            if c >= self.target:
                return t
        return None

    @property
    def objective(self) -> int:
        return sum(1 for c in self.explored_cells if c < self.target)

    @property
    def ok(self) -> bool:
        return not self.violations


def _move_kind(src: Cell, dst: Cell) -> Move:
    if src == dst:
        return Move.STAY
    if src.a != dst.a and src.b != dst.b:
        return Move.DIAGONAL
    return Move.ORTHOGONAL


def replay(inst: RpInstance, paths: Sequence[Sequence[tuple[int, int]]]) -> ExplorationTrace:
    """Replay per-robot cell sequences (one ``(a, b)`` per epoch).

    Raises ``ValueError`` when the paths do not fit the instance; every rule
    broken along the way is collected in ``violations`` instead.
    """
    g, T = inst.grid, inst.horizon
    if len(paths) != inst.n_robots:
        raise ValueError(f"plan has {len(paths)} robots, instance has {inst.n_robots}")
    cells = []
    for r, (robot, path) in enumerate(zip(inst.robots, paths)):
        if len(path) != T:
            raise ValueError(f"robot {r} path has {len(path)} epochs, horizon is {T}")
        row = [Cell(*c) for c in path]
        for c in row:
            if not g.contains(c):
                raise ValueError(f"robot {r} path leaves the grid at {tuple(c)}")
        if row[0] != robot.start:
            raise ValueError(f"robot {r} path starts at {tuple(row[0])}, expected {tuple(robot.start)}")
        cells.append(row)

    trace = ExplorationTrace(target=inst.target, n_cells=inst.n_cells)
    explored = {c for row in cells for c in row[:1]}
    trace.explored_cells.append(len(explored))
    for r, robot in enumerate(inst.robots):
        trace.steps.append([RobotStep(cells[r][0], robot.initial_battery_mj, EpochCost())])
    for t in range(1, T):
        for r, robot in enumerate(inst.robots):
            src, dst = cells[r][t - 1], cells[r][t]
            if max(abs(src.a - dst.a), abs(src.b - dst.b)) > 1:
                trace.violations.append(Violation("mobility", (r, t), f"{tuple(src)} -> {tuple(dst)} is not adjacent"))
            cost = epoch_energy(robot.profile, _move_kind(src, dst), dst not in explored, dst, g,
                                inst.epoch_duration, inst.speed)
            battery = trace.steps[r][-1].battery - cost.total
            if battery < 0:
                trace.violations.append(
                    Violation("battery", (r, t), f"battery underflow: {battery / 1000:.3f} J")
                )
            trace.steps[r].append(RobotStep(dst, battery, cost))
        explored.update(cells[r][t] for r in range(inst.n_robots))
        trace.explored_cells.append(len(explored))
    if trace.explored_cells[-1] < inst.target:
        trace.violations.append(
            Violation("coverage", (T - 1,), f"{trace.explored_cells[-1]} cells explored, {inst.target} required")
        )
    return trace


def _joules(mj: int) -> str:
    sign = "-" if mj < 0 else ""
    whole, frac = divmod(abs(mj), 1000)
    return f"{sign}{whole}.{frac:03d}"


def trace_header(n_robots: int) -> list[str]:
    cols = ["epoch", "explored_cells", "explored_pct"]
    for r in range(n_robots):
        cols += [f"r{r}_a", f"r{r}_b", f"r{r}_battery_J"]
    return cols


def write_trace_csv(trace: ExplorationTrace, path: str | Path) -> None:
    """epoch, explored_cells, explored_pct, then (a, b, battery_J) per robot."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header(len(trace.steps)))
        for t, (count, pct) in enumerate(zip(trace.explored_cells, trace.explored_pct)):
            row = [t, count, f"{pct:.4f}"]
            for steps in trace.steps:
                s = steps[t]
                row += [s.cell.a, s.cell.b, _joules(s.battery)]
            w.writerow(row)


COST_COLUMNS = ["epoch", "robot", "a", "b", "rx_J", "tx_J", "sensing_J", "motion_J", "idle_J", "total_J", "battery_J"]


def write_cost_csv(trace: ExplorationTrace, path: str | Path) -> None:
    """Long-format per-robot per-epoch energy breakdown."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COST_COLUMNS)
        for t in range(len(trace.explored_cells)):
            for r, steps in enumerate(trace.steps):
                s = steps[t]
                c = s.cost
                w.writerow([t, r, s.cell.a, s.cell.b] + [_joules(v) for v in (c.rx, c.tx, c.sensing, c.motion,
                                                                                 c.idle, c.total, s.battery)])

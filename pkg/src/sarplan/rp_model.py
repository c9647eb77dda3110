"""The fleet-size resource planning problem: instances, solutions and the MILP.

Epochs are 0-based here (epoch 0 is the deployment epoch). The objective is
the number of epochs that still have the coverage target unmet, so a plan that
first reaches the target at epoch ``k`` scores ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .energy import EnergyProfile, Move, classify_move, epoch_energy
from .grid import Cell, GridMap, neighbor_indices


class ProvablyInfeasible(ValueError):
    """Raised when an instance cannot meet its coverage target by counting alone."""


@dataclass(frozen=True)
class RobotSpec:
    robot_id: int
    profile: EnergyProfile
    start: Cell
    initial_battery: float | None = None  # joules; None means a full battery

    @property
    def initial_battery_mj(self) -> int:
        b = self.profile.battery_capacity if self.initial_battery is None else self.initial_battery
        return round(b * 1000)

    @property
    def capacity_mj(self) -> int:
        return round(self.profile.battery_capacity * 1000)


def coverage_target(kappa: float, n_cells: int) -> int:
    # Fraction(str()) keeps 0.7 * 10 from rounding up to 8
    return math.ceil(Fraction(str(kappa)) * n_cells)


@dataclass(frozen=True)
class RpInstance:
    grid: GridMap
    horizon: int
    epoch_duration: float
    robots: tuple[RobotSpec, ...]
    kappa: float
    speed: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "robots", tuple(self.robots))
        if self.horizon < 1:
            raise ValueError("horizon must be at least one epoch")
        if not 0 < self.kappa <= 1:
            raise ValueError("kappa must lie in (0, 1]")
        if not self.epoch_duration > 0 or not self.speed > 0:
            raise ValueError("epoch_duration and speed must be positive")
        if not self.robots:
            raise ValueError("instance needs at least one robot")
        for r in self.robots:
            object.__setattr__(r, "start", Cell(*r.start))
            if not self.grid.contains(r.start):
                raise ValueError(f"robot {r.robot_id} starts outside the grid at {tuple(r.start)}")
            if not 0 < r.initial_battery_mj <= r.capacity_mj:
                raise ValueError(f"robot {r.robot_id} initial battery must lie in (0, B_max]")

    @property
    def n_cells(self) -> int:
        return self.grid.total_cells

    @property
    def n_robots(self) -> int:
        return len(self.robots)

    @property
    def target(self) -> int:
        return coverage_target(self.kappa, self.n_cells)

    @property
    def starts(self) -> tuple[int, ...]:
        return tuple(self.grid.index(r.start) for r in self.robots)

    @property
    def size(self) -> int:
        """R * T * |AB|, the measure used to pick solver modes."""
        return self.n_robots * self.horizon * self.n_cells

    @cached_property
    def costs(self) -> "CostTables":
        return CostTables.build(self)

    def with_robots(self, robots: Sequence[RobotSpec]) -> "RpInstance":
        return RpInstance(self.grid, self.horizon, self.epoch_duration, tuple(robots), self.kappa, self.speed)


@dataclass(frozen=True)
class CostTables:
    """Per-robot energy lookup, millijoules.

    ``arc[r][src][j]`` is reception plus motion (or idle) for moving from
    ``src`` to ``nbr[src][j]``; ``explore[r][dst]`` is the sensing plus
    transmission surcharge when ``dst`` was unexplored.
    """

    nbr: tuple[tuple[int, ...], ...]
    arc: tuple[tuple[tuple[int, ...], ...], ...]
    explore: tuple[tuple[int, ...], ...]

    @classmethod
    def build(cls, inst: RpInstance) -> "CostTables":
        g = inst.grid
        nbr = tuple(neighbor_indices(g))
        by_profile: dict[EnergyProfile, tuple] = {}
        arc, explore = [], []
        for r in inst.robots:
            if r.profile not in by_profile:
                p_arc, p_exp = [], []
                for src in range(g.total_cells):
                    s = g.cell(src)
                    row = []
                    for dst in nbr[src]:
                        c = epoch_energy(r.profile, classify_move(s, g.cell(dst)), False, g.cell(dst), g,
                                         inst.epoch_duration, inst.speed)
                        row.append(c.total)
                    p_arc.append(tuple(row))
                for dst in range(g.total_cells):
                    d = g.cell(dst)
                    full = epoch_energy(r.profile, Move.STAY, True, d, g, inst.epoch_duration, inst.speed)
                    bare = epoch_energy(r.profile, Move.STAY, False, d, g, inst.epoch_duration, inst.speed)
                    p_exp.append(full.total - bare.total)
                by_profile[r.profile] = (tuple(p_arc), tuple(p_exp))
            a, e = by_profile[r.profile]
            arc.append(a)
            explore.append(e)
        return cls(nbr, tuple(arc), tuple(explore))

    def step_cost(self, r: int, src: int, dst: int, new: bool) -> int:
        j = self.nbr[src].index(dst)
        return self.arc[r][src][j] + (self.explore[r][dst] if new else 0)

    def stay_cost(self, r: int, cell: int) -> int:
        return self.arc[r][cell][self.nbr[cell].index(cell)]

    def min_epoch_cost(self, r: int) -> int:
        """Cheapest possible epoch for robot ``r`` anywhere on the grid."""
        return min(min(row) for row in self.arc[r])

    def min_gain_cost(self, r: int) -> int:
        """Cheapest epoch that ends in a previously unexplored cell."""
        best = None
        for src, row in enumerate(self.arc[r]):
            for j, dst in enumerate(self.nbr[src]):
                if dst != src:
                    c = row[j] + self.explore[r][dst]
                    best = c if best is None else min(best, c)
        if best is None:
            # single-cell grid: nothing new can ever be reached
            return min(min(row) for row in self.arc[r]) + max(self.explore[r])
        return best


@dataclass
class Solution:
    """Full assignment of the planning variables for one instance.

    ``d[t]``, ``e[t, cell]``, ``l[r, t, cell]`` are 0/1 arrays and
    ``battery[r, t]`` holds millijoules. ``paths`` restates ``l`` as flat cell
    indices per robot per epoch.
    """

    paths: tuple[tuple[int, ...], ...]
    d: np.ndarray
    e: np.ndarray
    l: np.ndarray
    battery: np.ndarray
    objective: int

    @classmethod
    def from_paths(cls, inst: RpInstance, paths: Sequence[Sequence[int]]) -> "Solution":
        """Derive the remaining variables from robot paths.

        ``e`` is the visited-so-far set, ``d`` is 1 exactly while coverage is
        below target, batteries follow the gated energy recursion.
        """
        R, T, N = inst.n_robots, inst.horizon, inst.n_cells
        paths = tuple(tuple(int(c) for c in p) for p in paths)
        if len(paths) != R or any(len(p) != T for p in paths):
            raise ValueError("paths must be one length-T sequence per robot")
        l = np.zeros((R, T, N), dtype=np.uint8)
        e = np.zeros((T, N), dtype=np.uint8)
        battery = np.zeros((R, T), dtype=np.int64)
        costs = inst.costs
        seen: set[int] = set()
        for t in range(T):
            before = set(seen)
            for r in range(R):
                l[r, t, paths[r][t]] = 1
                seen.add(paths[r][t])
                if t == 0:
                    battery[r, 0] = inst.robots[r].initial_battery_mj
                else:
                    src, dst = paths[r][t - 1], paths[r][t]
                    battery[r, t] = battery[r, t - 1] - costs.step_cost(r, src, dst, dst not in before)
            e[t, sorted(seen)] = 1
        d = (e.sum(axis=1) < inst.target).astype(np.uint8)
        # once coverage is met it stays met, so d is already nonincreasing
        return cls(paths, d, e, l, battery, int(d.sum()))

    def coverage(self) -> np.ndarray:
        return self.e.sum(axis=1)


# -- explicit MILP --------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str
    kind: str  # "binary" | "continuous"
    lb: float
    ub: float


@dataclass(frozen=True)
class Row:
    coeffs: tuple[tuple[int, float], ...]
    sense: str  # "<=", "=", ">="
    rhs: float
    tag: str


@dataclass
class MilpModel:
    variables: list[Var] = field(default_factory=list)
    constraints: list[Row] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def add_var(self, name: str, kind: str = "binary", lb: float = 0.0, ub: float = 1.0) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable {name}")
        if kind == "binary" and (lb, ub) != (0.0, 1.0):
            raise ValueError("binary variables are bounded by [0, 1]")
        self._index[name] = len(self.variables)
        self.variables.append(Var(name, kind, float(lb), float(ub)))
        return self._index[name]

    def var(self, name: str) -> int:
        return self._index[name]

    def has(self, name: str) -> bool:
        return name in self._index

    def add(self, terms: Iterable[tuple[str, float]], sense: str, rhs: float, tag: str) -> None:
        acc: dict[int, float] = {}
        for name, coef in terms:
            i = self._index[name]
            acc[i] = acc.get(i, 0.0) + coef
        coeffs = tuple(sorted((i, c) for i, c in acc.items() if c != 0))
        self.constraints.append(Row(coeffs, sense, float(rhs), tag))

    def count(self, prefix: str) -> int:
        return sum(1 for v in self.variables if v.name.startswith(prefix + "["))

    def check(self, values: dict[str, float], tol: float = 1e-6) -> list[str]:
        """Names of constraints (and bounds) that ``values`` violates."""
        x = np.array([values.get(v.name, 0.0) for v in self.variables], dtype=float)
        bad = []
        for v, xv in zip(self.variables, x):
            if xv < v.lb - tol or xv > v.ub + tol or (v.kind == "binary" and abs(xv - round(xv)) > tol):
                bad.append(f"bound {v.name}={xv}")
        for row in self.constraints:
            lhs = sum(c * x[i] for i, c in row.coeffs)
            scale = tol * max(1.0, abs(row.rhs))
            if (row.sense == "<=" and lhs > row.rhs + scale) or (row.sense == ">=" and lhs < row.rhs - scale) or (
                row.sense == "=" and abs(lhs - row.rhs) > scale
            ):
                bad.append(f"{row.tag}: lhs={lhs} {row.sense} {row.rhs}")
        return bad

    def objective_value(self, values: dict[str, float]) -> float:
        return sum(c * values.get(self.variables[i].name, 0.0) for i, c in self.objective.items())

    def to_text(self) -> str:
        """Canonical plain-text dump, stable across runs."""
        out = [f"variables {len(self.variables)}"]
        for v in self.variables:
            out.append(f"var {v.name} {v.kind} [{v.lb:g}, {v.ub:g}]")
        out.append("minimize " + " ".join(f"{c:+g}*{self.variables[i].name}" for i, c in sorted(self.objective.items())))
        out.append(f"constraints {len(self.constraints)}")
        for row in self.constraints:
            lhs = " ".join(f"{c:+g}*{self.variables[i].name}" for i, c in row.coeffs)
            out.append(f"{row.tag}: {lhs} {row.sense} {row.rhs:g}")
        return "\n".join(out) + "\n"

    def to_scipy(self):
        """Arguments for ``scipy.optimize.milp``: (c, integrality, bounds, constraints)."""
        from scipy.optimize import Bounds, LinearConstraint
        from scipy.sparse import coo_matrix

        n = len(self.variables)
        c = np.zeros(n)
        for i, v in self.objective.items():
            c[i] = v
        integrality = np.array([1 if v.kind == "binary" else 0 for v in self.variables])
        bounds = Bounds([v.lb for v in self.variables], [v.ub for v in self.variables])
        rows, cols, vals, lo, hi = [], [], [], [], []
        for k, row in enumerate(self.constraints):
            for i, coef in row.coeffs:
                rows.append(k)
                cols.append(i)
                vals.append(coef)
            lo.append(row.rhs if row.sense in (">=", "=") else -np.inf)
            hi.append(row.rhs if row.sense in ("<=", "=") else np.inf)
        A = coo_matrix((vals, (rows, cols)), shape=(len(self.constraints), n)).tocsr()
        return c, integrality, bounds, LinearConstraint(A, lo, hi)


def _cell_tag(g: GridMap, i: int) -> str:
    a, b = g.cell(i)
    return f"{a},{b}"


def d_name(t: int) -> str:
    return f"d[{t}]"


def e_name(g: GridMap, t: int, i: int) -> str:
    return f"e[{t},{_cell_tag(g, i)}]"


def l_name(g: GridMap, r: int, t: int, i: int) -> str:
    return f"l[{r},{t},{_cell_tag(g, i)}]"


def m_name(g: GridMap, r: int, t: int, i: int, j: int) -> str:
    return f"m[{r},{t},{_cell_tag(g, i)},{_cell_tag(g, j)}]"


def s_name(g: GridMap, r: int, t: int, j: int) -> str:
    return f"s[{r},{t},{_cell_tag(g, j)}]"


def b_name(r: int, t: int) -> str:
    return f"bat[{r},{t}]"


def counting_capacity(inst: RpInstance) -> int:
    """Most distinct cells any plan can have explored by the last epoch."""
    n_start = len(set(inst.starts))
    return min(inst.n_cells, n_start + inst.n_robots * (inst.horizon - 1))


def build_milp(inst: RpInstance, *, check_counting: bool = True) -> MilpModel:
    """Emit the full mixed-integer model for one instance.

    Raises :class:`ProvablyInfeasible` when the coverage target exceeds what
    the robots can visit even moving to a fresh cell every epoch.
    """
    if check_counting and inst.target > counting_capacity(inst):
        raise ProvablyInfeasible(
            f"coverage target {inst.target} exceeds counting capacity {counting_capacity(inst)}"
        )
    g, T, R, N = inst.grid, inst.horizon, inst.n_robots, inst.n_cells
    model = MilpModel()
    for t in range(T):
        model.add_var(d_name(t))
    for t in range(T):
        for i in range(N):
            model.add_var(e_name(g, t, i))
    for r in range(R):
        for t in range(T):
            for i in range(N):
                model.add_var(l_name(g, r, t, i))
    for r, robot in enumerate(inst.robots):
        for t in range(T):
            model.add_var(b_name(r, t), "continuous", 0.0, robot.capacity_mj)

    target = inst.target
    tf = T - 1
    model.add([(e_name(g, tf, i), 1.0) for i in range(N)], ">=", target, "final_coverage")
    for r in range(R):
        for t in range(T):
            model.add([(l_name(g, r, t, i), 1.0) for i in range(N)], "=", 1, f"occupancy[{r},{t}]")
    nbr = inst.costs.nbr
    for r in range(R):
        for t in range(T - 1):
            for i in range(N):
                terms = [(l_name(g, r, t + 1, i), 1.0)] + [(l_name(g, r, t, j), -1.0) for j in nbr[i]]
                model.add(terms, "<=", 0, f"mobility[{r},{t + 1},{_cell_tag(g, i)}]")
    for t in range(1, T):
        for i in range(N):
            tag = _cell_tag(g, i)
            model.add(
                [(e_name(g, t, i), 1.0), (e_name(g, t - 1, i), -1.0)] + [(l_name(g, r, t, i), -1.0) for r in range(R)],
                "<=", 0, f"explore_link[{t},{tag}]",
            )
            model.add([(e_name(g, t, i), 1.0), (e_name(g, t - 1, i), -1.0)], ">=", 0, f"explore_keep[{t},{tag}]")
    for t in range(T):
        for i in range(N):
            model.add(
                [(e_name(g, t, i), float(R))] + [(l_name(g, r, t, i), -1.0) for r in range(R)],
                ">=", 0, f"explore_mark[{t},{_cell_tag(g, i)}]",
            )
    for t in range(T):
        # sum e >= target * (1 - d)  <=>  sum e + target * d >= target
        model.add([(e_name(g, t, i), 1.0) for i in range(N)] + [(d_name(t), float(target))], ">=", target,
                  f"completion[{t}]")
    for t in range(T - 1):
        model.add([(d_name(t + 1), 1.0), (d_name(t), -1.0)], "<=", 0, f"done_stays_done[{t + 1}]")

    starts = set(inst.starts)
    for i in range(N):
        model.add([(e_name(g, 0, i), 1.0)], "=", 1.0 if i in starts else 0.0, f"init_explored[{_cell_tag(g, i)}]")
    for r, robot in enumerate(inst.robots):
        s = g.index(robot.start)
        model.add([(l_name(g, r, 0, s), 1.0)], "=", 1, f"init_position[{r}]")
        model.add([(b_name(r, 0), 1.0)], "=", robot.initial_battery_mj, f"init_battery[{r}]")

    linearize_movement(inst, model)
    model.objective = {model.var(d_name(t)): 1.0 for t in range(T)}
    return model


def linearize_movement(inst: RpInstance, model: MilpModel) -> None:
    """Add arc and exploration-surcharge products and the battery recursion.

    ``m`` replaces the occupancy product of consecutive epochs on every
    neighbouring pair, ``s`` replaces ``(1 - e[t]) * l[t+1]`` for each
    destination cell. All are exact for 0/1 operands.
    """
    g, T, N = inst.grid, inst.horizon, inst.n_cells
    costs = inst.costs
    for r in range(inst.n_robots):
        for t in range(T - 1):
            battery_terms = [(b_name(r, t + 1), 1.0), (b_name(r, t), -1.0)]
            for i in range(N):
                for k, j in enumerate(costs.nbr[i]):
                    m = m_name(g, r, t, i, j)
                    model.add_var(m)
                    li, lj = l_name(g, r, t, i), l_name(g, r, t + 1, j)
                    model.add([(m, 1.0), (li, -1.0), (lj, -1.0)], ">=", -1, f"arc_lo[{m}]")
                    model.add([(m, 1.0), (li, -1.0)], "<=", 0, f"arc_src[{m}]")
                    model.add([(m, 1.0), (lj, -1.0)], "<=", 0, f"arc_dst[{m}]")
                    battery_terms.append((m, float(costs.arc[r][i][k])))
            for j in range(N):
                s = s_name(g, r, t, j)
                model.add_var(s)
                lj, ej = l_name(g, r, t + 1, j), e_name(g, t, j)
                model.add([(s, 1.0), (lj, -1.0), (ej, 1.0)], ">=", 0, f"gate_lo[{s}]")
                model.add([(s, 1.0), (lj, -1.0)], "<=", 0, f"gate_dst[{s}]")
                model.add([(s, 1.0), (ej, 1.0)], "<=", 1, f"gate_new[{s}]")
                battery_terms.append((s, float(costs.explore[r][j])))
            # b[t+1] = b[t] - sum m * arc_cost - sum s * explore_cost
            model.add(battery_terms, "=", 0, f"battery[{r},{t + 1}]")


def milp_assignment(inst: RpInstance, sol: Solution) -> dict[str, float]:
    """Expand a solution into values for every MILP variable."""
    g, T, N = inst.grid, inst.horizon, inst.n_cells
    x: dict[str, float] = {}
    for t in range(T):
        x[d_name(t)] = float(sol.d[t])
        for i in range(N):
            x[e_name(g, t, i)] = float(sol.e[t, i])
    for r in range(inst.n_robots):
        for t in range(T):
            x[b_name(r, t)] = float(sol.battery[r, t])
            for i in range(N):
                x[l_name(g, r, t, i)] = float(sol.l[r, t, i])
        for t in range(T - 1):
            i, j = sol.paths[r][t], sol.paths[r][t + 1]
            x[m_name(g, r, t, i, j)] = 1.0
            if not sol.e[t, j]:
                x[s_name(g, r, t, j)] = 1.0
    return x


# -- independent checker ----------------------------------------------------


@dataclass(frozen=True)
class Violation:
    constraint: str
    index: tuple
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.constraint}{list(self.index)}: {self.detail}"


@dataclass
class EvalReport:
    feasible: bool
    violations: list[Violation]


def evaluate(inst: RpInstance, sol: Solution, limit: int = 100) -> EvalReport:
    """Re-check a solution against the problem definition directly.

    Batteries are recomputed through :func:`energy.epoch_energy`, not through
    the cost tables or the MILP rows.
    """
    g, T, R, N = inst.grid, inst.horizon, inst.n_robots, inst.n_cells
    if sol.d.shape != (T,) or sol.e.shape != (T, N) or sol.l.shape != (R, T, N) or sol.battery.shape != (R, T):
        raise ValueError("solution dimensions do not match the instance")
    out: list[Violation] = []

    def bad(name, idx, detail=""):
        out.append(Violation(name, tuple(idx), detail))

    for name, arr in (("binary_d", sol.d), ("binary_e", sol.e), ("binary_l", sol.l)):
        if not np.isin(arr, (0, 1)).all():
            bad(name, (), "non-binary entries")
    kappa = Fraction(str(inst.kappa))
    explored = sol.e.sum(axis=1)
    if explored[T - 1] < kappa * N:
        bad("final_coverage", (T - 1,), f"{explored[T - 1]} < {float(kappa * N):g}")
    for r in range(R):
        for t in range(T):
            if sol.l[r, t].sum() != 1:
                bad("occupancy", (r, t), f"robot occupies {int(sol.l[r, t].sum())} cells")
    pos = [[int(np.argmax(sol.l[r, t])) for t in range(T)] for r in range(R)]
    for r in range(R):
        for t in range(T - 1):
            c0, c1 = g.cell(pos[r][t]), g.cell(pos[r][t + 1])
            if max(abs(c0.a - c1.a), abs(c0.b - c1.b)) > 1:
                bad("mobility", (r, t + 1), f"{tuple(c0)} -> {tuple(c1)}")
    for t in range(T):
        for i in range(N):
            occ = int(sol.l[:, t, i].sum())
            if t > 0 and sol.e[t, i] > sol.e[t - 1, i] + occ:
                bad("explore_link", (t, i), "cell marked explored without a visit")
            if t > 0 and sol.e[t, i] < sol.e[t - 1, i]:
                bad("explore_keep", (t, i), "explored cell reverted")
            if R * sol.e[t, i] < occ:
                bad("explore_mark", (t, i), "visited cell not marked explored")
        if explored[t] < kappa * (1 - int(sol.d[t])) * N:
            bad("completion", (t,), f"d=0 with only {explored[t]} cells explored")
        if t > 0 and sol.d[t] > sol.d[t - 1]:
            bad("done_stays_done", (t,))
    starts = set(inst.starts)
    for i in range(N):
        if sol.e[0, i] != (i in starts):
            bad("init_explored", (i,))
    for r, robot in enumerate(inst.robots):
        if pos[r][0] != g.index(robot.start):
            bad("init_position", (r,), f"starts at {tuple(g.cell(pos[r][0]))}")
        if sol.battery[r, 0] != robot.initial_battery_mj:
            bad("init_battery", (r,))
        for t in range(T):
            if not 0 <= sol.battery[r, t] <= robot.capacity_mj:
                bad("battery_bounds", (r, t), f"{sol.battery[r, t] / 1000:g} J outside [0, B_max]")
        for t in range(T - 1):
            src, dst = g.cell(pos[r][t]), g.cell(pos[r][t + 1])
            if max(abs(src.a - dst.a), abs(src.b - dst.b)) > 1:
                continue
            cost = epoch_energy(robot.profile, classify_move(src, dst), not sol.e[t, pos[r][t + 1]], dst, g,
                                inst.epoch_duration, inst.speed)
            if sol.battery[r, t + 1] != sol.battery[r, t] - cost.total:
                bad("battery", (r, t + 1), f"expected {(sol.battery[r, t] - cost.total) / 1000:g} J")
    if int(sol.d.sum()) != sol.objective:
        bad("objective", (), f"sum d = {int(sol.d.sum())} but objective = {sol.objective}")
    return EvalReport(not out, out[:limit])

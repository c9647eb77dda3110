"""Greedy frontier assignment for instances too large to search exactly."""

from __future__ import annotations

import random

from ..grid import chebyshev
from ..rp_model import RpInstance, Solution
from .base import SolveBudget, SolveOutcome, Status
from .exact import quick_refutation


def _assign_targets(inst: RpInstance, pos, explored, rank) -> dict[int, int]:
    """Robot -> unexplored cell, greedily by (distance, cell index, robot rank)."""
    g = inst.grid
    free = [c for c in range(inst.n_cells) if c not in explored]
    if not free:
        return {}
    cells = [g.cell(c) for c in free]
    pairs = []
    for r, p in enumerate(pos):
        pc = g.cell(p)
        for c, cc in zip(free, cells):
            pairs.append((chebyshev(pc, cc), c, rank[r], r))
    pairs.sort()
    out: dict[int, int] = {}
    taken: set[int] = set()
    for _, c, _, r in pairs:
        if r in out or c in taken:
            continue
        out[r] = c
        taken.add(c)
        if len(out) == len(pos):
            break
    return out


def greedy_paths(inst: RpInstance, rank=None) -> list[list[int]]:
    """One greedy rollout; robots are processed in ``rank`` order (default: by id)."""
    g, R, T = inst.grid, inst.n_robots, inst.horizon
    costs = inst.costs
    rank = list(range(R)) if rank is None else list(rank)
    order = sorted(range(R), key=lambda r: rank[r])
    pos = list(inst.starts)
    bats = [r.initial_battery_mj for r in inst.robots]
    explored = set(pos)
    paths = [[p] for p in pos]
    for t in range(T - 1):
        rest_after = T - 2 - t
        done = len(explored) >= inst.target
        targets = {} if done else _assign_targets(inst, pos, explored, rank)
        stepping_into: set[int] = set()
        nxt = list(pos)
        for r in order:
            src = pos[r]
            stay = costs.stay_cost(r, src)
            dst = src
            if r in targets:
                goal = g.cell(targets[r])
                best = None
                for n in costs.nbr[src]:
                    fresh = n not in explored and n not in stepping_into
                    key = (chebyshev(g.cell(n), goal), 0 if fresh else 1, n)
                    if best is None or key < best:
                        best = key
                if best is not None and best[2] != src:
                    cand = best[2]
                    cost = costs.step_cost(r, src, cand, cand not in explored)
                    if bats[r] - cost >= rest_after * stay:
                        dst = cand
            cost = costs.step_cost(r, src, dst, dst not in explored)
            bats[r] -= cost
            nxt[r] = dst
            if dst not in explored:
                stepping_into.add(dst)
        pos = nxt
        explored.update(pos)
        for r in range(R):
            paths[r].append(pos[r])
    return paths


def _score(sol: Solution, target: int) -> tuple:
    final = int(sol.coverage()[-1])
    return (0 if (sol.battery >= 0).all() else 1, 0 if final >= target else 1, sol.objective, -final)


def solve_heuristic(inst: RpInstance, budget: SolveBudget) -> SolveOutcome:
    """Greedy plan, optionally improved by shuffled robot orders.

    Never proves optimality; reports ``Feasible`` when the coverage target is
    met with every battery non-negative, otherwise ``Unknown`` with the plan
    kept as a best-effort fallback when its batteries stay valid.
    """
    reason = quick_refutation(inst)
    if reason:
        return SolveOutcome(Status.PROVABLY_INFEASIBLE, bound=inst.horizon, reason=reason,
                            stats={"mode": "heuristic", "rollouts": 0})
    rng = random.Random(budget.seed)
    ranks = [list(range(inst.n_robots))]
    for _ in range(budget.restarts):
        rank = list(range(inst.n_robots))
        rng.shuffle(rank)
        ranks.append(rank)
    best = None
    for rank in ranks:
        sol = Solution.from_paths(inst, greedy_paths(inst, rank))
        if best is None or _score(sol, inst.target) < _score(best, inst.target):
            best = sol
    stats = {"mode": "heuristic", "rollouts": len(ranks)}
    batteries_ok = bool((best.battery >= 0).all())
    reached = int(best.coverage()[-1]) >= inst.target
    if reached and batteries_ok:
        return SolveOutcome(Status.FEASIBLE, best, bound=0, stats=stats)
    return SolveOutcome(Status.UNKNOWN, bound=0, stats=stats, best_effort=best if batteries_ok else None,
                        reason="greedy frontier plan missed the coverage target")

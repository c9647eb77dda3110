"""Exact branch-and-bound driver.

Iterative deepening on the completion epoch: the first epoch limit for which
the kernel finds a plan is the optimum, because every smaller limit has been
refuted. Subtrees below the root can be farmed out to worker processes; the
lowest-ordered successful subtree wins, which is also what a single worker
would have returned.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor

from ..rp_model import RpInstance, Solution, counting_capacity
from . import kernel as kernels
from .base import SolveBudget, SolveOutcome, Status
from .problem import KernelProblem, gain_bound, unexplored_distance

log = logging.getLogger("sarplan.solver")


def _emit(**fields) -> None:
    log.info(json.dumps(fields, sort_keys=True))


def root_bound(p: KernelProblem) -> int:
    """Smallest epoch limit the root-level bound does not refute."""
    cov = bin(p.start_mask).count("1")
    if cov >= p.target:
        return 0
    dist = unexplored_distance(p, p.start_mask)
    for klim in range(1, p.horizon):
        ub = sum(gain_bound(p, r, dist[p.start_pos[r]], p.start_bats[r], klim, 0) for r in range(p.n_robots))
        if cov + ub >= p.target:
            return klim
    return p.horizon


def quick_refutation(inst: RpInstance) -> str | None:
    cap = counting_capacity(inst)
    if inst.target > cap:
        return f"counting bound: at most {cap} cells can be explored, {inst.target} required"
    costs = inst.costs
    for r, robot in enumerate(inst.robots):
        if robot.initial_battery_mj < (inst.horizon - 1) * costs.min_epoch_cost(r):
            return f"energy bound: robot {robot.robot_id} cannot stay powered for {inst.horizon} epochs"
    return None


def _to_solution(inst: RpInstance, joint_path) -> Solution:
    paths = [tuple(step[r] for step in joint_path) for r in range(inst.n_robots)]
    return Solution.from_paths(inst, paths)


def _chunks(items, n):
    size = max(1, -(-len(items) // n))
    return [items[i:i + size] for i in range(0, len(items), size)]


def _subtree_task(args):
    backend, p, klim, chunk, max_nodes, deadline = args
    mod = kernels.select(p.n_cells, backend)
    return mod.search_subtrees(p, klim, chunk, max_nodes, deadline)


def solve_exact(inst: RpInstance, budget: SolveBudget, backend: str | None = None) -> SolveOutcome:
    start = time.monotonic()
    deadline = start + budget.wall_limit
    reason = quick_refutation(inst)
    if reason:
        _emit(event="refuted", reason=reason)
        return SolveOutcome(Status.PROVABLY_INFEASIBLE, bound=inst.horizon, reason=reason,
                            stats={"nodes": 0, "mode": "exact"})
    p = KernelProblem.from_instance(inst)
    mod = kernels.select(p.n_cells, backend)
    stats = {"nodes": 0, "mode": "exact", "backend": kernels.backend_name(mod), "workers": budget.workers}
    klim = root_bound(p)
    pool = ProcessPoolExecutor(budget.workers) if budget.workers > 1 else None
    try:
        while klim < p.horizon:
            remaining = budget.max_nodes - stats["nodes"]
            # at klim 0 the root itself meets the target; splitting would skip its shortcut
            if pool is None or klim == 0:
                path, nodes, exhausted = mod.search(p, klim, remaining, deadline)
            else:
                path, nodes, exhausted = _parallel_level(pool, mod, p, klim, remaining, deadline, budget.workers)
            stats["nodes"] += nodes
            _emit(event="level", klim=klim, nodes=nodes, found=path is not None, exhausted=exhausted,
                  wall_s=round(time.monotonic() - start, 4))
            if path is not None:
                sol = _to_solution(inst, path)
                _emit(event="incumbent", objective=sol.objective)
                return SolveOutcome(Status.OPTIMAL, sol, bound=sol.objective, stats=stats)
            if exhausted:
                return SolveOutcome(Status.UNKNOWN, bound=klim, stats=stats, budget_exhausted=True,
                                    reason=f"budget exhausted while refuting completion by epoch {klim}")
            klim += 1
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return SolveOutcome(Status.PROVABLY_INFEASIBLE, bound=p.horizon, stats=stats,
                        reason="exhaustive search: no plan meets the coverage target within the horizon")


def _parallel_level(pool, mod, p, klim, max_nodes, deadline, workers):
    children = mod.root_children(p, klim)
    if not children:
        return None, 1, False
    chunks = _chunks(children, workers * 4)
    backend = kernels.backend_name(mod)
    futures = [pool.submit(_subtree_task, (backend, p, klim, c, max_nodes, deadline)) for c in chunks]
    nodes, exhausted = 1, False
    for fut in futures:
        idx, path, n, ex = fut.result()
        nodes += n
        exhausted = exhausted or ex
        if path is not None:
            for f in futures:
                f.cancel()
            return path, nodes, False
    return None, nodes, exhausted

"""Exhaustive reference solver for tests.

Enumerates every joint move of every robot at every epoch, merging only states
that are literally identical, so it shares no pruning logic with the
branch-and-bound. Battery bookkeeping goes through ``energy.epoch_energy``
directly rather than the precomputed cost tables.
"""

from __future__ import annotations

import itertools

from ..energy import classify_move, epoch_energy
from ..grid import neighbors
from ..rp_model import RpInstance, Solution
from .base import SolveOutcome, Status

ORACLE_LIMIT = 2_000


def brute_force_oracle(inst: RpInstance) -> SolveOutcome:
    if inst.size > ORACLE_LIMIT:
        raise ValueError(f"oracle handles R*T*|AB| <= {ORACLE_LIMIT}, got {inst.size}")
    g, T, R = inst.grid, inst.horizon, inst.n_robots
    target = inst.target
    moves = {c: sorted(neighbors(g, c), key=g.index) for c in g.cells()}
    step_cost: dict = {}

    def cost(r, src, dst, new):
        key = (inst.robots[r].profile, src, dst, new)
        if key not in step_cost:
            step_cost[key] = epoch_energy(inst.robots[r].profile, classify_move(src, dst), new, dst, g,
                                          inst.epoch_duration, inst.speed).total
        return step_cost[key]

    start_pos = tuple(r.start for r in inst.robots)
    start = (start_pos, frozenset(start_pos), tuple(r.initial_battery_mj for r in inst.robots))
    met0 = 0 if len(start[1]) >= target else None
    # state -> (first epoch with coverage met or None, parent state)
    layers = [{start: (met0, None)}]
    for t in range(1, T):
        nxt: dict = {}
        for state, (met, _) in layers[-1].items():
            pos, explored, bats = state
            for joint in itertools.product(*(moves[p] for p in pos)):
                new_bats = tuple(
                    bats[r] - cost(r, pos[r], joint[r], joint[r] not in explored) for r in range(R)
                )
                if min(new_bats) < 0:
                    continue
                new_explored = explored | frozenset(joint)
                new_met = met if met is not None else (t if len(new_explored) >= target else None)
                child = (joint, new_explored, new_bats)
                prev = nxt.get(child)
                if prev is None or _better(new_met, prev[0]):
                    nxt[child] = (new_met, state)
        layers.append(nxt)
    best_state, best_met = None, None
    for state, (met, _) in layers[-1].items():
        if met is not None and (best_met is None or met < best_met):
            best_state, best_met = state, met
    stats = {"mode": "oracle", "states": sum(len(layer) for layer in layers)}
    if best_state is None:
        return SolveOutcome(Status.PROVABLY_INFEASIBLE, bound=T, stats=stats,
                            reason="exhaustive enumeration found no plan")
    chain = [best_state]
    for t in range(T - 1, 0, -1):
        chain.append(layers[t][chain[-1]][1])
    chain.reverse()
    paths = [tuple(g.index(state[0][r]) for state in chain) for r in range(R)]
    sol = Solution.from_paths(inst, paths)
    return SolveOutcome(Status.OPTIMAL, sol, bound=sol.objective, stats=stats)


def _better(a, b) -> bool:
    if a is None:
        return False
    return b is None or a < b

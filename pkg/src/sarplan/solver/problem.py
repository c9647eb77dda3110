"""Flat, picklable view of an instance consumed by the search kernels."""

from __future__ import annotations

from dataclasses import dataclass

from ..rp_model import RpInstance


@dataclass(frozen=True)
class KernelProblem:
    n_cells: int
    n_robots: int
    horizon: int
    target: int
    nbr: tuple[tuple[int, ...], ...]
    arc: tuple[tuple[tuple[int, ...], ...], ...]
    explore: tuple[tuple[int, ...], ...]
    stay: tuple[tuple[int, ...], ...]
    min_epoch: tuple[int, ...]
    gain_cost: tuple[int, ...]
    stay_is_min: bool
    group: tuple[int, ...]
    start_pos: tuple[int, ...]
    start_mask: int
    start_bats: tuple[int, ...]

    @classmethod
    def from_instance(cls, inst: RpInstance) -> "KernelProblem":
        costs = inst.costs
        R, N = inst.n_robots, inst.n_cells
        stay = tuple(tuple(costs.stay_cost(r, c) for c in range(N)) for r in range(R))
        min_epoch = tuple(costs.min_epoch_cost(r) for r in range(R))
        groups: dict = {}
        group = tuple(groups.setdefault(r.profile, len(groups)) for r in inst.robots)
        mask = 0
        for s in inst.starts:
            mask |= 1 << s
        return cls(
            n_cells=N,
            n_robots=R,
            horizon=inst.horizon,
            target=inst.target,
            nbr=costs.nbr,
            arc=costs.arc,
            explore=costs.explore,
            stay=stay,
            min_epoch=min_epoch,
            gain_cost=tuple(costs.min_gain_cost(r) for r in range(R)),
            stay_is_min=all(min(stay[r]) == min_epoch[r] and len(set(stay[r])) == 1 for r in range(R)),
            group=group,
            start_pos=inst.starts,
            start_mask=mask,
            start_bats=tuple(r.initial_battery_mj for r in inst.robots),
        )


def unexplored_distance(p: KernelProblem, mask: int) -> list[int]:
    """Moore-step distance from every cell to the nearest unexplored cell.

    Cells with nothing left to explore get ``n_cells`` (effectively infinite).
    """
    N = p.n_cells
    far = N
    dist = [far] * N
    frontier = [c for c in range(N) if not (mask >> c) & 1]
    for c in frontier:
        dist[c] = 0
    d = 0
    while frontier:
        d += 1
        nxt = []
        for c in frontier:
            for n in p.nbr[c]:
                if dist[n] == far:
                    dist[n] = d
                    nxt.append(n)
        frontier = nxt
    return dist


def gain_bound(p: KernelProblem, r: int, dist: int, bat: int, steps: int, epoch: int) -> int:
    """Most new cells robot ``r`` can still add within ``steps`` moves.

    ``dist`` is its distance to the nearest unexplored cell and ``epoch`` the
    epoch its battery reading ``bat`` belongs to.
    """
    if steps <= 0 or dist >= p.n_cells:
        return 0
    g = steps - max(dist, 1) + 1
    if g <= 0:
        return 0
    rest = p.horizon - 1 - epoch
    spare = bat - rest * p.min_epoch[r]
    extra = p.gain_cost[r] - p.min_epoch[r]
    if extra > 0:
        cap = spare // extra
        if cap < g:
            g = max(0, cap)
    return g


"""Depth-limited trajectory search, pure-Python reference kernel.

``search`` answers one question: can the coverage target be reached by epoch
``klim`` while every robot keeps a non-negative battery up to the horizon? It
explores joint moves epoch by epoch, assigning robots one at a time so partial
assignments can be pruned, and memoizes failed states under dominance.

The compiled kernel mirrors this module move for move; both must return the
same path and the same node count for the same input.
"""

from __future__ import annotations

import time

from .problem import KernelProblem, gain_bound, unexplored_distance


class Exhausted(Exception):
    pass


def _popcount(x: int) -> int:
    return bin(x).count("1")


class _Search:
    def __init__(self, p: KernelProblem, klim: int, max_nodes: int, deadline: float | None):
        self.p = p
        self.klim = klim
        self.max_nodes = max_nodes
        self.deadline = deadline
        self.nodes = 0
        self.memo: dict[tuple, list[tuple[int, tuple[int, ...]]]] = {}
        self.trail: list[tuple[int, ...]] = []

    # -- epoch level ------------------------------------------------------

    def node(self, t: int, pos: tuple[int, ...], mask: int, bats: tuple[int, ...]) -> bool:
        p = self.p
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise Exhausted
        if self.deadline is not None and not self.nodes & 1023 and time.monotonic() > self.deadline:
            raise Exhausted
        R, T = p.n_robots, p.horizon
        rest = T - 1 - t
        cov = _popcount(mask)
        met = cov >= p.target
        if met:
            if all(bats[r] >= rest * p.stay[r][pos[r]] for r in range(R)):
                self.trail.extend([pos] * (rest + 1))
                return True
            if p.stay_is_min:
                return False
        if t == T - 1:
            return False
        if not met and t >= self.klim:
            return False
        for r in range(R):
            if bats[r] < rest * p.min_epoch[r]:
                return False
        dist = unexplored_distance(p, mask)
        ubs = None
        if not met:
            steps = self.klim - t
            ubs = [gain_bound(p, r, dist[pos[r]], bats[r], steps, t) for r in range(R)]
            if cov + sum(ubs) < p.target:
                return False

        key, cbats = self._canonical(t, pos, bats)
        seen = self.memo.get(key)
        if seen is not None:
            for fmask, fbats in seen:
                if fmask & mask == mask and all(fb >= b for fb, b in zip(fbats, cbats)):
                    return False

        ok = self.expand(t, pos, mask, bats, dist, ubs, self._leaf)
        if ok:
            self.trail.append(pos)
        else:
            self.memo.setdefault(key, []).append((mask, cbats))
        return ok

    def _leaf(self, t, newpos, newmask, newbats):
        return self.node(t + 1, newpos, newmask, newbats)

    def _canonical(self, t, pos, bats):
        order = sorted(zip(self.p.group, pos, bats))
        return (t, tuple((g, c) for g, c, _ in order)), tuple(b for _, _, b in order)

    # -- robot-by-robot assignment within one epoch -------------------------

    def expand(self, t, pos, mask, bats, dist, ubs, leaf) -> bool:
        p = self.p
        R = p.n_robots
        next_rest = p.horizon - 2 - t
        options = [self._order(pos[r], mask, dist) for r in range(R)]
        # identical robots in identical states choose moves in nondecreasing order
        twin = [-1] * R
        for r in range(R):
            for q in range(r - 1, -1, -1):
                if p.group[q] == p.group[r] and pos[q] == pos[r] and bats[q] == bats[r]:
                    twin[r] = q
                    break
        tail = [0] * (R + 1)
        if ubs is not None:
            for r in range(R - 1, -1, -1):
                tail[r] = tail[r + 1] + ubs[r]
        steps = self.klim - t
        newpos = [0] * R
        newbats = [0] * R
        chosen = [0] * R

        def assign(i: int, nmask: int, assigned_ub: int) -> bool:
            if i == R:
                return leaf(t, tuple(newpos), nmask, tuple(newbats))
            src = pos[i]
            opts = options[i]
            arc = p.arc[i][src]
            explore = p.explore[i]
            reserve = next_rest * p.min_epoch[i]
            lo = chosen[twin[i]] if twin[i] >= 0 else 0
            # cells another robot is already entering this epoch go last
            claimed = nmask & ~mask
            visit = [k for k in range(lo, len(opts)) if not (claimed >> opts[k][1]) & 1]
            visit += [k for k in range(lo, len(opts)) if (claimed >> opts[k][1]) & 1]
            for k in visit:
                j, dst = opts[k]
                new = not (mask >> dst) & 1
                nb = bats[i] - arc[j] - (explore[dst] if new else 0)
                if nb < reserve:
                    continue
                nm = nmask | (1 << dst)
                ub_i = 0
                if ubs is not None:
                    ub_i = gain_bound(p, i, dist[dst], nb, steps - 1, t + 1)
                    if _popcount(nm) + assigned_ub + ub_i + tail[i + 1] < p.target:
                        continue
                newpos[i] = dst
                newbats[i] = nb
                chosen[i] = k
                if assign(i + 1, nm, assigned_ub + ub_i):
                    return True
            return False

        return assign(0, mask, 0)

    def _order(self, src: int, mask: int, dist: list[int]) -> list[tuple[int, int]]:
        """(arc slot, destination) pairs, unexplored first then toward the frontier."""
        ranked = []
        for j, dst in enumerate(self.p.nbr[src]):
            new = not (mask >> dst) & 1
            ranked.append((0 if new else 1, 0 if new else dist[dst], dst, j))
        ranked.sort()
        return [(j, dst) for _, _, dst, j in ranked]

    # -- entry points -------------------------------------------------------

    def run_from(self, t, pos, mask, bats) -> list[tuple[int, ...]] | None:
        self.trail = []
        if self.node(t, pos, mask, bats):
            return self.trail[::-1]
        return None

    def root_children(self) -> list[tuple[tuple[int, ...], int, tuple[int, ...]]]:
        """Joint successors of the root state, in search order."""
        p = self.p
        pos, mask, bats = p.start_pos, p.start_mask, p.start_bats
        dist = unexplored_distance(p, mask)
        ubs = None
        if _popcount(mask) < p.target:
            ubs = [gain_bound(p, r, dist[pos[r]], bats[r], self.klim, 0) for r in range(p.n_robots)]
        out = []

        def collect(t, newpos, newmask, newbats):
            out.append((newpos, newmask, newbats))
            return False

        self.expand(0, pos, mask, bats, dist, ubs, collect)
        return out


def search(p: KernelProblem, klim: int, max_nodes: int, deadline: float | None = None):
    """Full search from the deployment state.

    Returns ``(path, nodes, exhausted)`` where ``path`` lists the joint
    positions for every epoch or is ``None`` when no plan meets the target by
    ``klim``.
    """
    s = _Search(p, klim, max_nodes, deadline)
    try:
        path = s.run_from(0, p.start_pos, p.start_mask, p.start_bats)
    except Exhausted:
        return None, s.nodes, True
    return path, s.nodes, False


def root_children(p: KernelProblem, klim: int):
    return _Search(p, klim, 1 << 62, None).root_children()


def search_subtrees(p: KernelProblem, klim: int, children, max_nodes: int, deadline: float | None = None):
    """Search below the given root children in order, sharing one memo.

    Returns ``(index, path, nodes, exhausted)`` for the first child that leads
    to a plan, with ``path`` starting at the root.
    """
    s = _Search(p, klim, max_nodes, deadline)
    try:
        for idx, (pos, mask, bats) in enumerate(children):
            path = s.run_from(1, pos, mask, bats)
            if path is not None:
                return idx, [p.start_pos] + path, s.nodes, False
    except Exhausted:
        return None, None, s.nodes, True
    return None, None, s.nodes, False

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of ``_kernel_py``.

Same search, same move order, same pruning, so it returns the same path and
node count. Explored sets live in one 64-bit word, which caps grids at 64
cells; the selector in ``kernel.py`` falls back to Python beyond that.
"""

from libc.stdlib cimport malloc, free
import time

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

ctypedef unsigned long long u64
ctypedef long long i64

cdef int MAXOPT = 9


cdef class _CSearch:
    cdef int N, R, T, target, klim, E
    cdef bint stay_is_min, collect
    cdef i64 max_nodes, nodes
    cdef object deadline
    cdef int *nbr_off
    cdef int *nbr
    cdef i64 *arc
    cdef i64 *explore
    cdef i64 *stay
    cdef i64 *min_epoch
    cdef i64 *gain_cost
    cdef int *group
    # per-epoch scratch
    cdef int *pos
    cdef i64 *bats
    cdef u64 *mask
    cdef int *dist
    cdef int *queue
    cdef int *optdst
    cdef int *optj
    cdef int *optn
    cdef i64 *ubs
    cdef i64 *tail
    cdef bint *has_ubs
    cdef int *chosen
    cdef int *twin
    cdef object memo
    cdef list trail
    cdef list collected

    def __cinit__(self, p, int klim, i64 max_nodes, deadline):
        cdef int r, c, j, e, N, R, T
        N = p.n_cells
        R = p.n_robots
        T = p.horizon
        if N > 64:
            raise ValueError("compiled kernel handles at most 64 cells")
        self.N, self.R, self.T = N, R, T
        self.target = p.target
        self.klim = klim
        self.max_nodes = max_nodes
        self.deadline = deadline
        self.nodes = 0
        self.stay_is_min = p.stay_is_min
        self.collect = False
        self.E = sum(len(x) for x in p.nbr)
        self.nbr_off = <int *> malloc((N + 1) * sizeof(int))
        self.nbr = <int *> malloc(self.E * sizeof(int))
        self.arc = <i64 *> malloc(R * self.E * sizeof(i64))
        self.explore = <i64 *> malloc(R * N * sizeof(i64))
        self.stay = <i64 *> malloc(R * N * sizeof(i64))
        self.min_epoch = <i64 *> malloc(R * sizeof(i64))
        self.gain_cost = <i64 *> malloc(R * sizeof(i64))
        self.group = <int *> malloc(R * sizeof(int))
        self.pos = <int *> malloc((T + 1) * R * sizeof(int))
        self.bats = <i64 *> malloc((T + 1) * R * sizeof(i64))
        self.mask = <u64 *> malloc((T + 1) * sizeof(u64))
        self.dist = <int *> malloc((T + 1) * N * sizeof(int))
        self.queue = <int *> malloc(N * sizeof(int))
        self.optdst = <int *> malloc((T + 1) * R * MAXOPT * sizeof(int))
        self.optj = <int *> malloc((T + 1) * R * MAXOPT * sizeof(int))
        self.optn = <int *> malloc((T + 1) * R * sizeof(int))
        self.ubs = <i64 *> malloc((T + 1) * R * sizeof(i64))
        self.tail = <i64 *> malloc((T + 1) * (R + 1) * sizeof(i64))
        self.has_ubs = <bint *> malloc((T + 1) * sizeof(bint))
        self.chosen = <int *> malloc((T + 1) * R * sizeof(int))
        self.twin = <int *> malloc((T + 1) * R * sizeof(int))
        e = 0
        for c in range(N):
            self.nbr_off[c] = e
            for j in range(len(p.nbr[c])):
                self.nbr[e] = p.nbr[c][j]
                e += 1
        self.nbr_off[N] = e
        for r in range(R):
            e = 0
            for c in range(N):
                for j in range(len(p.nbr[c])):
                    self.arc[r * self.E + e] = p.arc[r][c][j]
                    e += 1
                self.explore[r * N + c] = p.explore[r][c]
                self.stay[r * N + c] = p.stay[r][c]
            self.min_epoch[r] = p.min_epoch[r]
            self.gain_cost[r] = p.gain_cost[r]
            self.group[r] = p.group[r]
        self.memo = {}
        self.trail = []
        self.collected = []

    def __dealloc__(self):
        free(self.nbr_off); free(self.nbr); free(self.arc); free(self.explore); free(self.stay)
        free(self.min_epoch); free(self.gain_cost); free(self.group); free(self.pos); free(self.bats)
        free(self.mask); free(self.dist); free(self.queue); free(self.optdst); free(self.optj)
        free(self.optn); free(self.ubs); free(self.tail); free(self.has_ubs); free(self.chosen)
        free(self.twin)

    # -- helpers -------------------------------------------------------------

    cdef void _distances(self, int t):
        cdef int N = self.N
        cdef int *dist = self.dist + t * N
        cdef u64 m = self.mask[t]
        cdef int c, head = 0, tail_ = 0, e, n
        for c in range(N):
            if (m >> c) & 1:
                dist[c] = N
            else:
                dist[c] = 0
                self.queue[tail_] = c
                tail_ += 1
        while head < tail_:
            c = self.queue[head]
            head += 1
            for e in range(self.nbr_off[c], self.nbr_off[c + 1]):
                n = self.nbr[e]
                if dist[n] == N:
                    dist[n] = dist[c] + 1
                    self.queue[tail_] = n
                    tail_ += 1

    cdef inline i64 _gain(self, int r, int d, i64 bat, int steps, int epoch):
        cdef i64 g, rest, spare, extra, cap
        if steps <= 0 or d >= self.N:
            return 0
        g = steps - (d if d > 1 else 1) + 1
        if g <= 0:
            return 0
        rest = self.T - 1 - epoch
        spare = bat - rest * self.min_epoch[r]
        extra = self.gain_cost[r] - self.min_epoch[r]
        if extra > 0:
            # floor division to match Python on negative spare
            if spare >= 0:
                cap = spare // extra
            else:
                cap = -((-spare + extra - 1) // extra)
            if cap < g:
                g = cap if cap > 0 else 0
        return g

    cdef void _order(self, int t, int r):
        cdef int src = self.pos[t * self.R + r]
        cdef u64 m = self.mask[t]
        cdef int *dist = self.dist + t * self.N
        cdef int base = (t * self.R + r) * MAXOPT
        cdef int n = 0, e, j, dst, k, key, kk
        cdef int keys[9]
        for e in range(self.nbr_off[src], self.nbr_off[src + 1]):
            j = e - self.nbr_off[src]
            dst = self.nbr[e]
            if (m >> dst) & 1:
                key = (1 << 24) | (dist[dst] << 8) | dst
            else:
                key = dst
            # insertion sort on (new-first, distance, cell)
            k = n
            while k > 0 and keys[k - 1] > key:
                keys[k] = keys[k - 1]
                self.optdst[base + k] = self.optdst[base + k - 1]
                self.optj[base + k] = self.optj[base + k - 1]
                k -= 1
            keys[k] = key
            self.optdst[base + k] = dst
            self.optj[base + k] = j
            n += 1
        self.optn[t * self.R + r] = n

    cdef tuple _pos_tuple(self, int t):
        return tuple([self.pos[t * self.R + r] for r in range(self.R)])

    cdef tuple _bats_tuple(self, int t):
        return tuple([self.bats[t * self.R + r] for r in range(self.R)])

    # -- search --------------------------------------------------------------

    cdef int node(self, int t) except -2:
        cdef int R = self.R, T = self.T, r, q
        cdef int rest = T - 1 - t
        cdef u64 m = self.mask[t]
        cdef int cov = __builtin_popcountll(m)
        cdef bint met = cov >= self.target
        cdef bint all_ok
        cdef i64 total
        cdef int *pos = self.pos + t * R
        cdef i64 *bats = self.bats + t * R
        self.nodes += 1
        if self.nodes > self.max_nodes:
            return -1
        if self.deadline is not None and (self.nodes & 1023) == 0 and time.monotonic() > self.deadline:
            return -1
        if met:
            all_ok = True
            for r in range(R):
                if bats[r] < rest * self.stay[r * self.N + pos[r]]:
                    all_ok = False
                    break
            if all_ok:
                pt = self._pos_tuple(t)
                self.trail.extend([pt] * (rest + 1))
                return 1
            if self.stay_is_min:
                return 0
        if t == T - 1:
            return 0
        if not met and t >= self.klim:
            return 0
        for r in range(R):
            if bats[r] < rest * self.min_epoch[r]:
                return 0
        self._distances(t)
        self.has_ubs[t] = not met
        if not met:
            total = 0
            for r in range(R):
                self.ubs[t * R + r] = self._gain(r, self.dist[t * self.N + pos[r]], bats[r], self.klim - t, t)
                total += self.ubs[t * R + r]
            if cov + total < self.target:
                return 0

        order = sorted(zip([self.group[r] for r in range(R)], self._pos_tuple(t), self._bats_tuple(t)))
        key = (t, tuple([(g, c) for g, c, _ in order]))
        cbats = tuple([b for _, _, b in order])
        seen = self.memo.get(key)
        if seen is not None:
            for fmask, fbats in seen:
                if (<u64> fmask & m) == m:
                    dominated = True
                    for q in range(R):
                        if fbats[q] < cbats[q]:
                            dominated = False
                            break
                    if dominated:
                        return 0

        res = self.expand(t)
        if res == 1:
            self.trail.append(self._pos_tuple(t))
        elif res == 0:
            if seen is None:
                self.memo[key] = [(m, cbats)]
            else:
                seen.append((m, cbats))
        return res

    cdef int expand(self, int t) except -2:
        cdef int R = self.R, r, q
        cdef int *pos = self.pos + t * R
        cdef i64 *bats = self.bats + t * R
        for r in range(R):
            self._order(t, r)
            self.twin[t * R + r] = -1
            for q in range(r - 1, -1, -1):
                if self.group[q] == self.group[r] and pos[q] == pos[r] and bats[q] == bats[r]:
                    self.twin[t * R + r] = q
                    break
        self.tail[t * (R + 1) + R] = 0
        if self.has_ubs[t]:
            for r in range(R - 1, -1, -1):
                self.tail[t * (R + 1) + r] = self.tail[t * (R + 1) + r + 1] + self.ubs[t * R + r]
        return self.assign(t, 0, self.mask[t], 0)

    cdef int assign(self, int t, int i, u64 nmask, i64 assigned_ub) except -2:
        cdef int R = self.R, N = self.N
        cdef int src, k, j, dst, lo, n, base, res, passno
        cdef u64 m = self.mask[t], claimed, nm
        cdef bint new, is_claimed
        cdef i64 nb, reserve, ub_i
        cdef int steps = self.klim - t
        cdef int next_rest = self.T - 2 - t
        if i == R:
            self.mask[t + 1] = nmask
            if self.collect:
                self.collected.append((self._pos_tuple(t + 1), nmask, self._bats_tuple(t + 1)))
                return 0
            return self.node(t + 1)
        src = self.pos[t * R + i]
        reserve = next_rest * self.min_epoch[i]
        lo = self.chosen[t * R + self.twin[t * R + i]] if self.twin[t * R + i] >= 0 else 0
        n = self.optn[t * R + i]
        base = (t * R + i) * MAXOPT
        claimed = nmask & ~m
        for passno in range(2):
            for k in range(lo, n):
                dst = self.optdst[base + k]
                is_claimed = (claimed >> dst) & 1
                if is_claimed != (passno == 1):
                    continue
                j = self.optj[base + k]
                new = not ((m >> dst) & 1)
                nb = self.bats[t * R + i] - self.arc[i * self.E + self.nbr_off[src] + j]
                if new:
                    nb -= self.explore[i * N + dst]
                if nb < reserve:
                    continue
                nm = nmask | ((<u64> 1) << dst)
                ub_i = 0
                if self.has_ubs[t]:
                    ub_i = self._gain(i, self.dist[t * N + dst], nb, steps - 1, t + 1)
                    if __builtin_popcountll(nm) + assigned_ub + ub_i + self.tail[t * (R + 1) + i + 1] < self.target:
                        continue
                self.pos[(t + 1) * R + i] = dst
                self.bats[(t + 1) * R + i] = nb
                self.chosen[t * R + i] = k
                res = self.assign(t, i + 1, nm, assigned_ub + ub_i)
                if res != 0:
                    return res
        return 0

    # -- entry points ----------------------------------------------------------

    cdef _load(self, int t, pos, u64 m, bats):
        cdef int r
        for r in range(self.R):
            self.pos[t * self.R + r] = pos[r]
            self.bats[t * self.R + r] = bats[r]
        self.mask[t] = m

    def run_from(self, int t, pos, m, bats):
        self.trail = []
        self._load(t, pos, m, bats)
        res = self.node(t)
        if res == -1:
            raise _Exhausted
        if res == 1:
            return self.trail[::-1]
        return None

    def root_children(self, p):
        cdef int r
        self._load(0, p.start_pos, p.start_mask, p.start_bats)
        cov = __builtin_popcountll(self.mask[0])
        self._distances(0)
        self.has_ubs[0] = cov < self.target
        if self.has_ubs[0]:
            for r in range(self.R):
                self.ubs[r] = self._gain(r, self.dist[self.pos[r]], self.bats[r], self.klim, 0)
        self.collect = True
        self.collected = []
        self.expand(0)
        self.collect = False
        return self.collected

    @property
    def node_count(self):
        return self.nodes


class _Exhausted(Exception):
    pass


def search(p, int klim, max_nodes, deadline=None):
    s = _CSearch(p, klim, max_nodes, deadline)
    try:
        path = s.run_from(0, p.start_pos, p.start_mask, p.start_bats)
    except _Exhausted:
        return None, s.node_count, True
    return path, s.node_count, False


def root_children(p, int klim):
    return _CSearch(p, klim, 1 << 62, None).root_children(p)


def search_subtrees(p, int klim, children, max_nodes, deadline=None):
    s = _CSearch(p, klim, max_nodes, deadline)
    try:
        for idx, (pos, m, bats) in enumerate(children):
            path = s.run_from(1, pos, m, bats)
            if path is not None:
                return idx, [p.start_pos] + path, s.node_count, False
    except _Exhausted:
        return None, None, s.node_count, True
    return None, None, s.node_count, False

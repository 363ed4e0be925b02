"""Pure-Python FastVC-style kernel; twin of ``_kernel.pyx``."""

from __future__ import annotations

import time

from ..seeding import SplitMix64

WALL_CHECK_MASK = 63


class CoverState:
    """Candidate cover with incrementally maintained loss/gain counters.

    ``loss[v]`` (v in cover): edges covered by v alone.
    ``gain[v]`` (v outside): uncovered edges incident to v.
    """

    def __init__(self, n, offsets, adj, adj_e, eu, ev):
        self.n = n
        self.off = offsets
        self.adj = adj
        self.adj_e = adj_e
        self.eu = eu
        self.ev = ev
        m = len(eu)
        self.in_c = [False] * n
        self.loss = [0] * n
        self.gain = [0] * n
        self.age = [0] * n
        self.cover = []
        self.cpos = [-1] * n
        # initially every edge is uncovered
        self.uncov = list(range(m))
        self.upos = list(range(m))
        for v in range(n):
            self.gain[v] = offsets[v + 1] - offsets[v]

    def _uncover(self, e):
        self.upos[e] = len(self.uncov)
        self.uncov.append(e)

    def _cover_edge(self, e):
        i = self.upos[e]
        last = self.uncov.pop()
        if last != e:
            self.uncov[i] = last
            self.upos[last] = i
        self.upos[e] = -1

    def add(self, v):
        in_c, loss, gain = self.in_c, self.loss, self.gain
        in_c[v] = True
        self.cpos[v] = len(self.cover)
        self.cover.append(v)
        gain[v] = 0
        for i in range(self.off[v], self.off[v + 1]):
            u = self.adj[i]
            if in_c[u]:
                loss[u] -= 1
            else:
                loss[v] += 1
                gain[u] -= 1
                self._cover_edge(self.adj_e[i])

    def remove(self, v):
        in_c, loss, gain = self.in_c, self.loss, self.gain
        in_c[v] = False
        i = self.cpos[v]
        last = self.cover.pop()
        if last != v:
            self.cover[i] = last
            self.cpos[last] = i
        self.cpos[v] = -1
        loss[v] = 0
        for i in range(self.off[v], self.off[v + 1]):
            u = self.adj[i]
            if in_c[u]:
                loss[u] += 1
            else:
                gain[u] += 1
                gain[v] += 1
                self._uncover(self.adj_e[i])


def solve(n, offsets, adj, adj_e, eu, ev, seed, budget, wallclock, bms):
    """Returns ``(best_size, trajectory, cover, used)``; ``best_size`` is -1 if infeasible."""
    t0 = time.perf_counter()
    m = len(eu)
    off = offsets.tolist()
    adjl = adj.tolist()
    adjel = adj_e.tolist()
    eul = eu.tolist()
    evl = ev.tolist()

    def now_us():
        return int((time.perf_counter() - t0) * 1e6)

    if not wallclock and budget < m + n:
        return -1, [], None, budget
    rng = SplitMix64(seed)
    st = CoverState(n, off, adjl, adjel, eul, evl)
    loss, gain, age, in_c, cover, uncov = st.loss, st.gain, st.age, st.in_c, st.cover, st.uncov

    # construction: higher-degree endpoint of each uncovered edge, then drop redundant vertices
    for e in range(m):
        u, v = eul[e], evl[e]
        if not in_c[u] and not in_c[v]:
            du = off[u + 1] - off[u]
            dv = off[v + 1] - off[v]
            st.add(u if du >= dv else v)
    for v in range(n):
        if in_c[v] and loss[v] == 0:
            st.remove(v)

    if wallclock:
        elapsed = now_us()
        if elapsed > budget:
            return -1, [], None, budget
    else:
        elapsed = m + n
    best = len(cover)
    best_cover = list(cover)
    traj = [(elapsed, best)]
    step = 0
    ops = 0

    def out_of_time():
        if wallclock:
            return (ops & WALL_CHECK_MASK) == 0 and now_us() >= budget
        return elapsed >= budget

    while True:
        if not uncov:
            if len(cover) < best:
                best = len(cover)
                best_cover = list(cover)
                traj.append((now_us() if wallclock else elapsed, best))
            if not cover or out_of_time():
                break
            v = cover[0]
            for w in cover:
                if loss[w] < loss[v] or (loss[w] == loss[v] and w < v):
                    v = w
            st.remove(v)
            ops += 1
            elapsed += 1
            step += 1
            age[v] = step
            continue

        if out_of_time():
            break
        u = -1
        if cover:
            size = len(cover)
            # each 64-bit draw yields two samples: high half, then low half
            for t in range(bms):
                if t & 1 == 0:
                    z = rng.next()
                    w = cover[((z >> 32) * size) >> 32]
                else:
                    w = cover[((z & 0xFFFFFFFF) * size) >> 32]
                if u < 0 or loss[w] < loss[u] or (loss[w] == loss[u] and w < u):
                    u = w
            st.remove(u)
            ops += 1
            elapsed += 1
            step += 1
            age[u] = step
            if out_of_time():
                break

        e = uncov[rng.below(len(uncov))]
        a, b = eul[e], evl[e]
        if a == u:
            v = b
        elif b == u:
            v = a
        elif gain[a] != gain[b]:
            v = a if gain[a] > gain[b] else b
        elif age[a] != age[b]:
            v = a if age[a] < age[b] else b
        else:
            v = a if a < b else b
        st.add(v)
        ops += 1
        elapsed += 1
        step += 1
        age[v] = step

    used = min(now_us(), budget) if wallclock else budget
    return best, traj, best_cover, used

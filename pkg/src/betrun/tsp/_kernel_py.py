"""Pure-Python chained 2-opt kernel.

Statement-for-statement twin of ``_kernel.pyx``; both must produce identical
results for identical inputs in virtual-time mode.
"""

from __future__ import annotations

import math
import time
from collections import deque

from ..seeding import SplitMix64

WALL_CHECK_MASK = 255


def solve(coords, ceil, dmat, neigh, seed, budget, wallclock, window):
    """Run the solver; returns ``(best_len, trajectory, tour, used)``.

    ``best_len`` is -1 when the budget does not cover construction.
    Budgets and elapsed times are candidate evaluations (virtual) or
    microseconds (wall-clock).
    """
    t0 = time.perf_counter()
    n = len(coords)
    xs = [float(v) for v in coords[:, 0]]
    ys = [float(v) for v in coords[:, 1]]
    rows = dmat.tolist() if dmat is not None else None
    nb = neigh.tolist()
    k = len(nb[0]) if n else 0
    rng = SplitMix64(seed)

    def D(i, j):
        if rows is not None:
            return rows[i][j]
        dx = xs[i] - xs[j]
        dy = ys[i] - ys[j]
        d = math.sqrt(dx * dx + dy * dy)
        return int(math.ceil(d)) if ceil else int(d + 0.5)

    def now_us():
        return int((time.perf_counter() - t0) * 1e6)

    if not wallclock and budget < n * k:
        return -1, [], None, budget

    # nearest-neighbour construction from a random start city
    start = rng.below(n)
    visited = [False] * n
    tour = [start]
    visited[start] = True
    cur = start
    length = 0
    for _ in range(n - 1):
        nxt = -1
        for c in nb[cur]:
            if not visited[c]:
                nxt = c
                break
        if nxt < 0:
            best_d = 0
            for c in range(n):
                if not visited[c]:
                    d = D(cur, c)
                    if nxt < 0 or d < best_d:
                        nxt = c
                        best_d = d
        visited[nxt] = True
        tour.append(nxt)
        length += D(cur, nxt)
        cur = nxt
    length += D(cur, start)

    if wallclock:
        elapsed = now_us()
        if elapsed > budget:
            return -1, [], None, budget
    else:
        elapsed = n * k
    evals = 0

    traj = [(elapsed, length)]
    best_len = length
    best_tour = list(tour)
    work_is_best = True
    pos = [0] * n
    for i, c in enumerate(tour):
        pos[c] = i
    queue = deque(tour)
    inq = [True] * n

    def reverse(i, j):
        seg = (j - i) % n + 1
        if 2 * seg > n:
            i, j = (j + 1) % n, (i - 1) % n
            seg = n - seg
        for s in range(seg // 2):
            p = (i + s) % n
            q = (j - s) % n
            cp, cq = tour[p], tour[q]
            tour[p] = cq
            pos[cq] = p
            tour[q] = cp
            pos[cp] = q

    stop = False
    while not stop:
        while queue:
            a = queue.popleft()
            inq[a] = False
            improved = False
            for direction in (0, 1):
                if direction == 0:
                    b = tour[(pos[a] + 1) % n]
                else:
                    b = tour[(pos[a] - 1) % n]
                d_ab = D(a, b)
                for c in nb[a]:
                    if wallclock:
                        if (evals & WALL_CHECK_MASK) == 0 and now_us() >= budget:
                            stop = True
                            break
                    elif elapsed >= budget:
                        stop = True
                        break
                    evals += 1
                    elapsed += 1
                    d_ac = D(a, c)
                    if d_ac >= d_ab:
                        break
                    if direction == 0:
                        d = tour[(pos[c] + 1) % n]
                    else:
                        d = tour[(pos[c] - 1) % n]
                    if d == a:
                        continue
                    delta = d_ac + D(b, d) - d_ab - D(c, d)
                    if delta < 0:
                        if direction == 0:
                            reverse(pos[b], pos[c])
                        else:
                            reverse(pos[a], pos[d])
                        length += delta
                        for v in (a, b, c, d):
                            if not inq[v]:
                                inq[v] = True
                                queue.append(v)
                        if length < best_len:
                            best_len = length
                            work_is_best = True
                            traj.append((now_us() if wallclock else elapsed, length))
                        improved = True
                        break
                if stop or improved:
                    break
            if stop:
                break
        if stop:
            break

        # local optimum: keep the better of work and incumbent, then kick
        if work_is_best:
            best_tour[:] = tour
        else:
            tour[:] = best_tour
            for i, c in enumerate(tour):
                pos[c] = i
            length = best_len
        work_is_best = False
        if n < 4:
            break

        # segment-local double bridge: swap two adjacent sub-segments inside a
        # window of at most `window` positions starting at a random position
        span = min(window, n - 1)
        i0 = rng.below(n)
        o1 = o2 = o3 = 0
        while o1 == o2 or o2 == o3 or o1 == o3:
            o1 = 1 + rng.below(span)
            o2 = 1 + rng.below(span)
            o3 = 1 + rng.below(span)
        o1, o2, o3 = sorted((o1, o2, o3))
        t = tour
        a0 = t[(i0 + o1 - 1) % n]
        a1 = t[(i0 + o1) % n]
        b0 = t[(i0 + o2 - 1) % n]
        b1 = t[(i0 + o2) % n]
        c0 = t[(i0 + o3 - 1) % n]
        c1 = t[(i0 + o3) % n]
        delta = D(a0, b1) + D(c0, a1) + D(b0, c1) - D(a0, a1) - D(b0, b1) - D(c0, c1)
        ends = (a0, a1, b0, b1, c0, c1)
        moved = [t[(i0 + j) % n] for j in range(o2, o3)] + [t[(i0 + j) % n] for j in range(o1, o2)]
        for j, c in enumerate(moved):
            p = (i0 + o1 + j) % n
            tour[p] = c
            pos[c] = p
        length += delta
        for v in ends:
            if not inq[v]:
                inq[v] = True
                queue.append(v)
        if length < best_len:
            best_len = length
            work_is_best = True
            traj.append((now_us() if wallclock else elapsed, length))

    if work_is_best:
        best_tour[:] = tour
    used = min(now_us(), budget) if wallclock else budget
    return best_len, traj, best_tour, used

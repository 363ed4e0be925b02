# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled chained 2-opt kernel; see ``_kernel_py.py`` for the reference twin."""

from libc.math cimport sqrt, ceil as c_ceil
from libc.stdint cimport int32_t, int64_t, uint64_t
from libc.stdlib cimport malloc, realloc, free
from libc.string cimport memcpy
from posix.time cimport clock_gettime, timespec, CLOCK_MONOTONIC

import numpy as np

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef int WALL_CHECK_MASK = 255


cdef inline uint64_t sm_next(uint64_t* state) noexcept nogil:
    state[0] += GOLDEN
    cdef uint64_t z = state[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline int64_t sm_below(uint64_t* state, int64_t n) noexcept nogil:
    return <int64_t>(((sm_next(state) >> 32) * <uint64_t>n) >> 32)


cdef inline int64_t now_us(timespec* t0) noexcept nogil:
    cdef timespec t
    clock_gettime(CLOCK_MONOTONIC, &t)
    return (t.tv_sec - t0.tv_sec) * 1000000 + (t.tv_nsec - t0.tv_nsec) // 1000


cdef struct Ctx:
    int n
    int ceil2d
    const double* xs
    const double* ys
    const int32_t* dmat


cdef inline int64_t D(Ctx* c, int i, int j) noexcept nogil:
    cdef double dx, dy, d
    if c.dmat != NULL:
        return c.dmat[<int64_t>i * c.n + j]
    dx = c.xs[i] - c.xs[j]
    dy = c.ys[i] - c.ys[j]
    d = sqrt(dx * dx + dy * dy)
    if c.ceil2d:
        return <int64_t>c_ceil(d)
    return <int64_t>(d + 0.5)


cdef inline int mod(int a, int n) noexcept nogil:
    a %= n
    return a + n if a < 0 else a


cdef inline void reverse(int* tour, int* pos, int n, int i, int j) noexcept nogil:
    cdef int seg = mod(j - i, n) + 1
    cdef int s, p, q, cp, cq, ti
    if 2 * seg > n:
        ti = i
        i = mod(j + 1, n)
        j = mod(ti - 1, n)
        seg = n - seg
    for s in range(seg // 2):
        p = mod(i + s, n)
        q = mod(j - s, n)
        cp = tour[p]
        cq = tour[q]
        tour[p] = cq
        pos[cq] = p
        tour[q] = cp
        pos[cp] = q


cdef struct Traj:
    int64_t* data
    int64_t size
    int64_t cap


cdef inline int traj_push(Traj* t, int64_t elapsed, int64_t q) noexcept nogil:
    cdef int64_t* grown
    if t.size == t.cap:
        t.cap = t.cap * 2 + 16
        grown = <int64_t*>realloc(t.data, 2 * t.cap * sizeof(int64_t))
        if grown == NULL:
            return -1
        t.data = grown
    t.data[2 * t.size] = elapsed
    t.data[2 * t.size + 1] = q
    t.size += 1
    return 0


cdef inline void enqueue(int* queue, int* qtail, int* qlen, char* inq, int n, int v) noexcept nogil:
    if not inq[v]:
        inq[v] = 1
        queue[qtail[0]] = v
        qtail[0] = (qtail[0] + 1) % n
        qlen[0] += 1


cdef int run(Ctx* cx, const int32_t* nb, int k, uint64_t seed, int64_t budget, int wallclock, int window,
             int* best_tour, int64_t* out_best, int64_t* out_used, Traj* traj) noexcept nogil:
    cdef int n = cx.n
    cdef uint64_t rng = seed
    cdef timespec t0
    clock_gettime(CLOCK_MONOTONIC, &t0)
    cdef int64_t elapsed = 0, evals = 0, length = 0, best_len, delta, d, best_d
    cdef int64_t d_ab, d_ac
    cdef int i, c, cur, nxt, start, a, b, dd, direction, ci, stop, improved, work_is_best
    cdef int p1, p2, p3, tmp, w, span, i0
    cdef int ends[6]
    cdef int* tour = <int*>malloc(n * sizeof(int))
    cdef int* pos = <int*>malloc(n * sizeof(int))
    cdef int* queue = <int*>malloc(n * sizeof(int))
    cdef int* scratch = <int*>malloc(n * sizeof(int))
    cdef char* inq = <char*>malloc(n * sizeof(char))
    cdef int qhead = 0, qtail = 0, qlen = 0
    if tour == NULL or pos == NULL or queue == NULL or inq == NULL or scratch == NULL:
        free(tour); free(pos); free(queue); free(inq); free(scratch)
        return -2

    # nearest-neighbour construction from a random start city
    start = <int>sm_below(&rng, n)
    for i in range(n):
        inq[i] = 0  # doubles as the visited flag during construction
    tour[0] = start
    inq[start] = 1
    cur = start
    for i in range(1, n):
        nxt = -1
        for ci in range(k):
            c = nb[<int64_t>cur * k + ci]
            if not inq[c]:
                nxt = c
                break
        if nxt < 0:
            best_d = 0
            for c in range(n):
                if not inq[c]:
                    d = D(cx, cur, c)
                    if nxt < 0 or d < best_d:
                        nxt = c
                        best_d = d
        inq[nxt] = 1
        tour[i] = nxt
        length += D(cx, cur, nxt)
        cur = nxt
    length += D(cx, cur, start)

    if wallclock:
        elapsed = now_us(&t0)
        if elapsed > budget:
            free(tour); free(pos); free(queue); free(inq); free(scratch)
            out_best[0] = -1
            out_used[0] = budget
            return 0
    else:
        elapsed = <int64_t>n * k

    if traj_push(traj, elapsed, length) < 0:
        free(tour); free(pos); free(queue); free(inq); free(scratch)
        return -2
    best_len = length
    memcpy(best_tour, tour, n * sizeof(int))
    work_is_best = 1
    for i in range(n):
        pos[tour[i]] = i
        queue[i] = tour[i]
        inq[tour[i]] = 1
    qlen = n
    qhead = 0
    qtail = 0

    stop = 0
    while not stop:
        while qlen > 0:
            a = queue[qhead]
            qhead = (qhead + 1) % n
            qlen -= 1
            inq[a] = 0
            improved = 0
            for direction in range(2):
                if direction == 0:
                    b = tour[mod(pos[a] + 1, n)]
                else:
                    b = tour[mod(pos[a] - 1, n)]
                d_ab = D(cx, a, b)
                for ci in range(k):
                    c = nb[<int64_t>a * k + ci]
                    if wallclock:
                        if (evals & WALL_CHECK_MASK) == 0 and now_us(&t0) >= budget:
                            stop = 1
                            break
                    elif elapsed >= budget:
                        stop = 1
                        break
                    evals += 1
                    elapsed += 1
                    d_ac = D(cx, a, c)
                    if d_ac >= d_ab:
                        break
                    if direction == 0:
                        dd = tour[mod(pos[c] + 1, n)]
                    else:
                        dd = tour[mod(pos[c] - 1, n)]
                    if dd == a:
                        continue
                    delta = d_ac + D(cx, b, dd) - d_ab - D(cx, c, dd)
                    if delta < 0:
                        if direction == 0:
                            reverse(tour, pos, n, pos[b], pos[c])
                        else:
                            reverse(tour, pos, n, pos[a], pos[dd])
                        length += delta
                        enqueue(queue, &qtail, &qlen, inq, n, a)
                        enqueue(queue, &qtail, &qlen, inq, n, b)
                        enqueue(queue, &qtail, &qlen, inq, n, c)
                        enqueue(queue, &qtail, &qlen, inq, n, dd)
                        if length < best_len:
                            best_len = length
                            work_is_best = 1
                            if traj_push(traj, now_us(&t0) if wallclock else elapsed, length) < 0:
                                stop = 2
                        improved = 1
                        break
                if stop or improved:
                    break
            if stop:
                break
        if stop:
            break

        if work_is_best:
            memcpy(best_tour, tour, n * sizeof(int))
        else:
            memcpy(tour, best_tour, n * sizeof(int))
            for i in range(n):
                pos[tour[i]] = i
            length = best_len
        work_is_best = 0
        if n < 4:
            break

        # segment-local double bridge inside a window starting at i0
        span = window if window < n - 1 else n - 1
        i0 = <int>sm_below(&rng, n)
        p1 = 0
        p2 = 0
        p3 = 0
        while p1 == p2 or p2 == p3 or p1 == p3:
            p1 = 1 + <int>sm_below(&rng, span)
            p2 = 1 + <int>sm_below(&rng, span)
            p3 = 1 + <int>sm_below(&rng, span)
        if p1 > p2:
            tmp = p1; p1 = p2; p2 = tmp
        if p2 > p3:
            tmp = p2; p2 = p3; p3 = tmp
        if p1 > p2:
            tmp = p1; p1 = p2; p2 = tmp
        ends[0] = tour[(i0 + p1 - 1) % n]; ends[1] = tour[(i0 + p1) % n]
        ends[2] = tour[(i0 + p2 - 1) % n]; ends[3] = tour[(i0 + p2) % n]
        ends[4] = tour[(i0 + p3 - 1) % n]; ends[5] = tour[(i0 + p3) % n]
        delta = (D(cx, ends[0], ends[3]) + D(cx, ends[4], ends[1]) + D(cx, ends[2], ends[5])
                 - D(cx, ends[0], ends[1]) - D(cx, ends[2], ends[3]) - D(cx, ends[4], ends[5]))
        # A B C D -> A C B D
        w = 0
        for i in range(p2, p3):
            scratch[w] = tour[(i0 + i) % n]
            w += 1
        for i in range(p1, p2):
            scratch[w] = tour[(i0 + i) % n]
            w += 1
        for i in range(w):
            c = (i0 + p1 + i) % n
            tour[c] = scratch[i]
            pos[scratch[i]] = c
        length += delta
        for i in range(6):
            enqueue(queue, &qtail, &qlen, inq, n, ends[i])
        if length < best_len:
            best_len = length
            work_is_best = 1
            if traj_push(traj, now_us(&t0) if wallclock else elapsed, length) < 0:
                stop = 2
                break

    if work_is_best:
        memcpy(best_tour, tour, n * sizeof(int))
    free(tour); free(pos); free(queue); free(inq); free(scratch)
    if stop == 2:
        return -2
    out_best[0] = best_len
    if wallclock:
        elapsed = now_us(&t0)
        out_used[0] = elapsed if elapsed < budget else budget
    else:
        out_used[0] = budget
    return 0


def solve(coords, bint ceil, dmat, neigh, seed, long long budget, bint wallclock, int window):
    """Same contract as ``_kernel_py.solve``."""
    cdef const double[:, ::1] xy = np.ascontiguousarray(coords, dtype=np.float64)
    cdef int n = xy.shape[0]
    cdef const double[::1] xs = np.ascontiguousarray(xy[:, 0])
    cdef const double[::1] ys = np.ascontiguousarray(xy[:, 1])
    cdef const int32_t[:, ::1] nbv = np.ascontiguousarray(neigh, dtype=np.int32)
    cdef const int32_t[:, ::1] dm
    cdef int k = nbv.shape[1]
    cdef Ctx cx
    cdef Traj traj
    cdef int64_t best = -1, used = 0
    cdef uint64_t useed = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef int status
    cdef int[::1] best_tour
    if not wallclock and budget < <int64_t>n * k:
        return -1, [], None, budget
    cx.n = n
    cx.ceil2d = ceil
    cx.xs = &xs[0]
    cx.ys = &ys[0]
    cx.dmat = NULL
    if dmat is not None:
        dm = np.ascontiguousarray(dmat, dtype=np.int32)
        cx.dmat = &dm[0, 0]
    best_tour_arr = np.empty(n, dtype=np.intc)
    best_tour = best_tour_arr
    traj.data = NULL
    traj.size = 0
    traj.cap = 0
    with nogil:
        status = run(&cx, &nbv[0, 0], k, useed, budget, wallclock, window, &best_tour[0], &best, &used, &traj)
    try:
        if status != 0:
            raise MemoryError("tsp kernel allocation failed")
        if best < 0:
            return -1, [], None, used
        events = [(traj.data[2 * i], traj.data[2 * i + 1]) for i in range(traj.size)]
        return best, events, best_tour_arr.tolist(), used
    finally:
        free(traj.data)

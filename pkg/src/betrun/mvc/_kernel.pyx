# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled FastVC-style kernel; see ``_kernel_py.py`` for the reference twin."""

from libc.stdint cimport int32_t, int64_t, uint64_t
from libc.stdlib cimport malloc, realloc, free, calloc
from libc.string cimport memcpy
from posix.time cimport clock_gettime, timespec, CLOCK_MONOTONIC

import numpy as np

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef int WALL_CHECK_MASK = 63


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


cdef struct State:
    int n
    int64_t m
    const int64_t* off
    const int32_t* adj
    const int32_t* adj_e
    char* in_c
    int64_t* loss
    int64_t* gain
    int64_t* age
    int32_t* cover
    int32_t* cpos
    int64_t csize
    int32_t* uncov
    int64_t* upos
    int64_t usize


cdef inline void add_v(State* s, int v) noexcept nogil:
    cdef int64_t i, j, e, last
    cdef int u
    s.in_c[v] = 1
    s.cpos[v] = <int32_t>s.csize
    s.cover[s.csize] = v
    s.csize += 1
    s.gain[v] = 0
    for i in range(s.off[v], s.off[v + 1]):
        u = s.adj[i]
        if s.in_c[u]:
            s.loss[u] -= 1
        else:
            s.loss[v] += 1
            s.gain[u] -= 1
            e = s.adj_e[i]
            j = s.upos[e]
            s.usize -= 1
            last = s.uncov[s.usize]
            if last != e:
                s.uncov[j] = <int32_t>last
                s.upos[last] = j
            s.upos[e] = -1


cdef inline void remove_v(State* s, int v) noexcept nogil:
    cdef int64_t i, e
    cdef int u, last
    s.in_c[v] = 0
    i = s.cpos[v]
    s.csize -= 1
    last = s.cover[s.csize]
    if last != v:
        s.cover[i] = last
        s.cpos[last] = <int32_t>i
    s.cpos[v] = -1
    s.loss[v] = 0
    for i in range(s.off[v], s.off[v + 1]):
        u = s.adj[i]
        if s.in_c[u]:
            s.loss[u] += 1
        else:
            s.gain[u] += 1
            s.gain[v] += 1
            e = s.adj_e[i]
            s.upos[e] = s.usize
            s.uncov[s.usize] = <int32_t>e
            s.usize += 1


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


cdef inline bint out_of_time(int wallclock, int64_t ops, int64_t elapsed, int64_t budget,
                             timespec* t0) noexcept nogil:
    if wallclock:
        return (ops & WALL_CHECK_MASK) == 0 and now_us(t0) >= budget
    return elapsed >= budget


cdef int run(State* s, const int32_t* eu, const int32_t* ev, uint64_t seed, int64_t budget,
             int wallclock, int bms, int32_t* best_cover, int64_t* out_best,
             int64_t* out_used, Traj* traj) noexcept nogil:
    cdef uint64_t rng = seed
    cdef timespec t0
    clock_gettime(CLOCK_MONOTONIC, &t0)
    cdef int n = s.n
    cdef int64_t m = s.m
    cdef int64_t e, elapsed, best, step = 0, ops = 0, du, dv, size, t
    cdef int u, v, w, a, b
    cdef uint64_t key, ukey, z = 0
    cdef Py_ssize_t i

    for e in range(m):
        u = eu[e]
        v = ev[e]
        if not s.in_c[u] and not s.in_c[v]:
            du = s.off[u + 1] - s.off[u]
            dv = s.off[v + 1] - s.off[v]
            add_v(s, u if du >= dv else v)
    for v in range(n):
        if s.in_c[v] and s.loss[v] == 0:
            remove_v(s, v)

    if wallclock:
        elapsed = now_us(&t0)
        if elapsed > budget:
            out_best[0] = -1
            out_used[0] = budget
            return 0
    else:
        elapsed = m + n
    best = s.csize
    memcpy(best_cover, s.cover, s.csize * sizeof(int32_t))
    if traj_push(traj, elapsed, best) < 0:
        return -2

    while True:
        if s.usize == 0:
            if s.csize < best:
                best = s.csize
                memcpy(best_cover, s.cover, s.csize * sizeof(int32_t))
                if traj_push(traj, now_us(&t0) if wallclock else elapsed, best) < 0:
                    return -2
            if s.csize == 0 or out_of_time(wallclock, ops, elapsed, budget, &t0):
                break
            v = s.cover[0]
            for i in range(s.csize):
                w = s.cover[i]
                if s.loss[w] < s.loss[v] or (s.loss[w] == s.loss[v] and w < v):
                    v = w
            remove_v(s, v)
            ops += 1
            elapsed += 1
            step += 1
            s.age[v] = step
            continue

        if out_of_time(wallclock, ops, elapsed, budget, &t0):
            break
        u = -1
        if s.csize > 0:
            size = s.csize
            # (loss, id) packed into one key so the minimum is branch-free
            ukey = 0xFFFFFFFFFFFFFFFFULL
            # each 64-bit draw yields two samples: high half, then low half
            for t in range(bms):
                if t & 1 == 0:
                    z = sm_next(&rng)
                    w = s.cover[((z >> 32) * <uint64_t>size) >> 32]
                else:
                    w = s.cover[((z & 0xFFFFFFFFULL) * <uint64_t>size) >> 32]
                key = (<uint64_t>s.loss[w] << 32) | <uint64_t>w
                ukey = key if key < ukey else ukey
            u = <int>(ukey & 0xFFFFFFFFULL)
            remove_v(s, u)
            ops += 1
            elapsed += 1
            step += 1
            s.age[u] = step
            if out_of_time(wallclock, ops, elapsed, budget, &t0):
                break

        e = s.uncov[sm_below(&rng, s.usize)]
        a = eu[e]
        b = ev[e]
        if a == u:
            v = b
        elif b == u:
            v = a
        elif s.gain[a] != s.gain[b]:
            v = a if s.gain[a] > s.gain[b] else b
        elif s.age[a] != s.age[b]:
            v = a if s.age[a] < s.age[b] else b
        else:
            v = a if a < b else b
        add_v(s, v)
        ops += 1
        elapsed += 1
        step += 1
        s.age[v] = step

    out_best[0] = best
    if wallclock:
        elapsed = now_us(&t0)
        out_used[0] = elapsed if elapsed < budget else budget
    else:
        out_used[0] = budget
    return 0


def solve(int n, offsets, adj, adj_e, eu, ev, seed, long long budget, bint wallclock, int bms):
    """Same contract as ``_kernel_py.solve``."""
    cdef const int64_t[::1] offv = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const int32_t[::1] adjv = np.ascontiguousarray(adj, dtype=np.int32)
    cdef const int32_t[::1] adjev = np.ascontiguousarray(adj_e, dtype=np.int32)
    cdef const int32_t[::1] euv = np.ascontiguousarray(eu, dtype=np.int32)
    cdef const int32_t[::1] evv = np.ascontiguousarray(ev, dtype=np.int32)
    cdef int64_t m = euv.shape[0]
    cdef State s
    cdef Traj traj
    cdef int64_t best = -1, used = 0, i
    cdef int status
    cdef uint64_t useed = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    if not wallclock and budget < m + n:
        return -1, [], None, budget
    # dummy element keeps the pointers valid for empty graphs
    adj_arr = np.zeros(max(adjv.shape[0], 1), dtype=np.int32)
    adj_arr[:adjv.shape[0]] = adjv
    adje_arr = np.zeros(max(adjev.shape[0], 1), dtype=np.int32)
    adje_arr[:adjev.shape[0]] = adjev
    eu_arr = np.zeros(max(m, 1), dtype=np.int32)
    eu_arr[:m] = euv
    ev_arr = np.zeros(max(m, 1), dtype=np.int32)
    ev_arr[:m] = evv
    cdef const int32_t[::1] adj2 = adj_arr
    cdef const int32_t[::1] adje2 = adje_arr
    cdef const int32_t[::1] eu2 = eu_arr
    cdef const int32_t[::1] ev2 = ev_arr
    cover_arr = np.empty(max(n, 1), dtype=np.int32)
    cdef int32_t[::1] best_cover = cover_arr

    s.n = n
    s.m = m
    s.off = &offv[0]
    s.adj = &adj2[0]
    s.adj_e = &adje2[0]
    s.in_c = <char*>calloc(max(n, 1), sizeof(char))
    s.loss = <int64_t*>calloc(max(n, 1), sizeof(int64_t))
    s.gain = <int64_t*>calloc(max(n, 1), sizeof(int64_t))
    s.age = <int64_t*>calloc(max(n, 1), sizeof(int64_t))
    s.cover = <int32_t*>malloc(max(n, 1) * sizeof(int32_t))
    s.cpos = <int32_t*>malloc(max(n, 1) * sizeof(int32_t))
    s.uncov = <int32_t*>malloc(max(m, 1) * sizeof(int32_t))
    s.upos = <int64_t*>malloc(max(m, 1) * sizeof(int64_t))
    traj.data = NULL
    traj.size = 0
    traj.cap = 0
    try:
        if (s.in_c == NULL or s.loss == NULL or s.gain == NULL or s.age == NULL
                or s.cover == NULL or s.cpos == NULL or s.uncov == NULL or s.upos == NULL):
            raise MemoryError("mvc kernel allocation failed")
        s.csize = 0
        s.usize = m
        for i in range(n):
            s.cpos[i] = -1
            s.gain[i] = offv[i + 1] - offv[i]
        for i in range(m):
            s.uncov[i] = <int32_t>i
            s.upos[i] = i
        with nogil:
            status = run(&s, &eu2[0], &ev2[0], useed, budget, wallclock, bms,
                         &best_cover[0], &best, &used, &traj)
        if status != 0:
            raise MemoryError("mvc kernel allocation failed")
        if best < 0:
            return -1, [], None, used
        events = [(traj.data[2 * i], traj.data[2 * i + 1]) for i in range(traj.size)]
        return best, events, cover_arr[:best].tolist(), used
    finally:
        free(s.in_c); free(s.loss); free(s.gain); free(s.age)
        free(s.cover); free(s.cpos); free(s.uncov); free(s.upos)
        free(traj.data)

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: Kruskal with fixings, stable-set enumeration and the
bilayer shortest paths behind odd-cycle separation."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free, realloc

cnp.import_array()

cdef enum:
    OK = 0
    FORCED_CYCLE = 1
    DISCONNECTED = 2


cdef inline double* realloc_d(double* p, Py_ssize_t n) noexcept:
    return <double*> realloc(p, n * sizeof(double))


cdef inline long long* realloc_l(long long* p, Py_ssize_t n) noexcept:
    return <long long*> realloc(p, n * sizeof(long long))


cdef inline Py_ssize_t _find(Py_ssize_t* parent, Py_ssize_t u) noexcept nogil:
    cdef Py_ssize_t root = u, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[u] != root:
        nxt = parent[u]
        parent[u] = root
        u = nxt
    return root


def kruskal(Py_ssize_t n_vertices, eu, ev, order, state):
    cdef const long long[:] eu_v = np.ascontiguousarray(eu, dtype=np.int64)
    cdef const long long[:] ev_v = np.ascontiguousarray(ev, dtype=np.int64)
    cdef const long long[:] order_v = np.ascontiguousarray(order, dtype=np.int64)
    cdef const signed char[:] st = np.ascontiguousarray(state, dtype=np.int8)
    cdef Py_ssize_t m = st.shape[0], e, t, a, b, need = n_vertices - 1, count = 0
    cdef cnp.ndarray[cnp.int64_t, ndim=1] chosen = np.empty(max(m, 1), dtype=np.int64)
    cdef Py_ssize_t* parent = <Py_ssize_t*> malloc(max(n_vertices, 1) * sizeof(Py_ssize_t))
    cdef int flag = OK
    try:
        for e in range(n_vertices):
            parent[e] = e
        for e in range(m):
            if st[e] == 1:
                a = _find(parent, eu_v[e])
                b = _find(parent, ev_v[e])
                if a == b:
                    return chosen[:count].copy(), FORCED_CYCLE
                parent[a] = b
                chosen[count] = e
                count += 1
        for t in range(order_v.shape[0]):
            if count == need:
                break
            e = order_v[t]
            if st[e] != 0:
                continue
            a = _find(parent, eu_v[e])
            b = _find(parent, ev_v[e])
            if a != b:
                parent[a] = b
                chosen[count] = e
                count += 1
        if count != need:
            flag = DISCONNECTED
        return chosen[:count].copy(), flag
    finally:
        free(parent)


cdef void _stable_rec(int n, unsigned long long* nbr, int v, unsigned long long chosen,
                      int size, unsigned long long blocked, int kmin, int kmax, list out):
    if size > kmax:
        return
    if v == n:
        if size >= kmin:
            out.append(<long long> chosen)
        return
    if size + (n - v) < kmin:
        return
    if not ((blocked >> v) & 1) and size < kmax:
        _stable_rec(n, nbr, v + 1, chosen | (1ULL << v), size + 1, blocked | nbr[v], kmin, kmax, out)
    _stable_rec(n, nbr, v + 1, chosen, size, blocked, kmin, kmax, out)


def stable_sets(int n, nbr_masks, int kmin, int kmax):
    if n > 62:
        raise ValueError("stable_sets supports at most 62 vertices")
    cdef unsigned long long* nbr = <unsigned long long*> malloc(max(n, 1) * sizeof(unsigned long long))
    cdef int i
    cdef list out = []
    try:
        for i in range(n):
            nbr[i] = <unsigned long long> int(nbr_masks[i])
        _stable_rec(n, nbr, 0, 0, 0, 0, kmin, kmax, out)
    finally:
        free(nbr)
    return np.array(out, dtype=np.int64)


cdef inline bint _less(double da, long long na, double db, long long nb) noexcept nogil:
    return da < db or (da == db and na < nb)


def bilayer_paths(indptr, indices, y, Py_ssize_t source):
    cdef const long long[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long long[:] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[:] yy = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = ip.shape[0] - 1, N = 2 * n
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist = np.full(N, np.inf)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pred = np.full(N, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] done = np.zeros(N, dtype=np.uint8)
    # binary heap of (dist, node) with lazy deletion
    cdef Py_ssize_t cap = ix.shape[0] + 2, size = 0, i, c, p, t
    cdef double* hd = <double*> malloc(cap * sizeof(double))
    cdef long long* hn = <long long*> malloc(cap * sizeof(long long))
    cdef double du, w, nd, td
    cdef long long node, u, side, v, nxt, tn
    try:
        dist[2 * source] = 0.0
        hd[0] = 0.0
        hn[0] = 2 * source
        size = 1
        while size > 0:
            du = hd[0]
            node = hn[0]
            size -= 1
            if size > 0:
                hd[0] = hd[size]
                hn[0] = hn[size]
                i = 0
                while True:
                    c = 2 * i + 1
                    if c >= size:
                        break
                    if c + 1 < size and _less(hd[c + 1], hn[c + 1], hd[c], hn[c]):
                        c += 1
                    if _less(hd[c], hn[c], hd[i], hn[i]):
                        td = hd[c]; hd[c] = hd[i]; hd[i] = td
                        tn = hn[c]; hn[c] = hn[i]; hn[i] = tn
                        i = c
                    else:
                        break
            if done[node]:
                continue
            done[node] = 1
            u = node // 2
            side = node % 2
            for t in range(ip[u], ip[u + 1]):
                v = ix[t]
                w = 1.0 - yy[u] - yy[v]
                if w < 0.0:
                    w = 0.0
                nxt = 2 * v + (1 - side)
                nd = du + w
                if nd < dist[nxt]:
                    dist[nxt] = nd
                    pred[nxt] = node
                    if size == cap:
                        cap *= 2
                        hd = <double*> realloc_d(hd, cap)
                        hn = <long long*> realloc_l(hn, cap)
                    i = size
                    hd[i] = nd
                    hn[i] = nxt
                    size += 1
                    while i > 0:
                        p = (i - 1) // 2
                        if _less(hd[i], hn[i], hd[p], hn[p]):
                            td = hd[p]; hd[p] = hd[i]; hd[i] = td
                            tn = hn[p]; hn[p] = hn[i]; hn[i] = tn
                            i = p
                        else:
                            break
        return dist, pred
    finally:
        free(hd)
        free(hn)


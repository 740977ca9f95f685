"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Signatures and results match the compiled module exactly; ``kernels`` picks
one of the two at import time.
"""

from __future__ import annotations

import heapq

import numpy as np

OK = 0
FORCED_CYCLE = 1
DISCONNECTED = 2


def _find(parent, u):
    root = u
    while parent[root] != root:
        root = parent[root]
    while parent[u] != root:
        parent[u], u = root, parent[u]
    return root


def kruskal(n_vertices, eu, ev, order, state):
    """Kruskal over ``order`` honouring per-edge ``state`` (0 free, 1 in, 2 out).

    Returns ``(chosen, flag)``; ``chosen`` lists edge indices in selection
    order (forced edges first).
    """
    parent = list(range(n_vertices))
    chosen = []
    eu = eu.tolist()
    ev = ev.tolist()
    state = state.tolist()
    for e, s in enumerate(state):
        if s == 1:
            a, b = _find(parent, eu[e]), _find(parent, ev[e])
            if a == b:
                return np.array(chosen, dtype=np.int64), FORCED_CYCLE
            parent[a] = b
            chosen.append(e)
    need = n_vertices - 1
    for e in order.tolist():
        if len(chosen) == need:
            break
        if state[e] != 0:
            continue
        a, b = _find(parent, eu[e]), _find(parent, ev[e])
        if a != b:
            parent[a] = b
            chosen.append(e)
    flag = OK if len(chosen) == need else DISCONNECTED
    return np.array(chosen, dtype=np.int64), flag


def stable_sets(n, nbr_masks, kmin, kmax):
    """All stable sets with ``kmin <= size <= kmax`` as bitmasks, ascending
    in the order a include-first depth-first search produces them."""
    nbr = [int(x) for x in nbr_masks]
    out = []

    def rec(v, chosen, size, blocked):
        if size > kmax:
            return
        if v == n:
            if size >= kmin:
                out.append(chosen)
            return
        if size + (n - v) < kmin:
            return
        if not (blocked >> v) & 1 and size < kmax:
            rec(v + 1, chosen | (1 << v), size + 1, blocked | nbr[v])
        rec(v + 1, chosen, size, blocked)

    rec(0, 0, 0, 0)
    return np.array(out, dtype=np.int64)


def bilayer_paths(indptr, indices, y, source):
    """Dijkstra from ``(source, 0)`` in the bilayer graph of H.

    Node ``2*u + side`` is the copy of vertex ``u`` on ``side``; every edge
    ``uv`` of H yields arcs between opposite sides weighted
    ``max(0, 1 - y_u - y_v)``. Returns ``(dist, pred)`` over the ``2n`` nodes.
    """
    n = len(indptr) - 1
    dist = np.full(2 * n, np.inf)
    pred = np.full(2 * n, -1, dtype=np.int64)
    ip = indptr.tolist()
    ix = indices.tolist()
    yy = y.tolist()
    d = [float("inf")] * (2 * n)
    p = [-1] * (2 * n)
    start = 2 * source
    d[start] = 0.0
    heap = [(0.0, start)]
    done = [False] * (2 * n)
    while heap:
        du, node = heapq.heappop(heap)
        if done[node]:
            continue
        done[node] = True
        u, side = divmod(node, 2)
        for t in range(ip[u], ip[u + 1]):
            v = ix[t]
            w = 1.0 - yy[u] - yy[v]
            if w < 0.0:
                w = 0.0
            nxt = 2 * v + (1 - side)
            nd = du + w
            if nd < d[nxt]:
                d[nxt] = nd
                p[nxt] = node
                heapq.heappush(heap, (nd, nxt))
    dist[:] = d
    pred[:] = p
    return dist, pred

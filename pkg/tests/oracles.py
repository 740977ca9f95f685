"""Independent brute-force oracles used to freeze and cross-check values.

Nothing here imports the package's solvers; only plain enumeration.
"""

import itertools

import numpy as np


def is_stable(pairs, chosen):
    s = set(chosen)
    return not any(a in s and b in s for a, b in pairs)


def brute_kstab(n, pairs, k, costs, fixed_one=(), fixed_zero=()):
    """(value, set) minimizing costs over stable k-subsets, or None."""
    best = None
    for combo in itertools.combinations(range(n), k):
        s = set(combo)
        if not set(fixed_one) <= s or s & set(fixed_zero):
            continue
        if not is_stable(pairs, combo):
            continue
        val = float(sum(costs[i] for i in combo))
        if best is None or val < best[0] - 1e-12:
            best = (val, frozenset(combo))
    return best


def stability_number(n, pairs):
    for k in range(n, 0, -1):
        for combo in itertools.combinations(range(n), k):
            if is_stable(pairs, combo):
                return k
    return 0


def is_spanning_tree(n, edges, subset):
    if len(subset) != n - 1:
        return False
    parent = list(range(n))

    def find(u):
        while parent[u] != u:
            u = parent[u]
        return u

    for e in subset:
        a, b = find(edges[e][0]), find(edges[e][1])
        if a == b:
            return False
        parent[a] = b
    return True


def all_spanning_trees(n, edges):
    return [c for c in itertools.combinations(range(len(edges)), n - 1) if is_spanning_tree(n, edges, c)]


def brute_mst(n, edges, costs, forced_in=(), forced_out=()):
    best = None
    for t in all_spanning_trees(n, edges):
        s = set(t)
        if not set(forced_in) <= s or s & set(forced_out):
            continue
        val = float(sum(costs[e] for e in t))
        if best is None or val < best - 1e-12:
            best = val
    return best


def brute_opt(n, edges, weights, conflicts):
    best = None
    for t in all_spanning_trees(n, edges):
        if is_stable(conflicts, t):
            val = float(sum(weights[e] for e in t))
            if best is None or val < best:
                best = val
    return best


def lp_vertex_enumeration(c, rows, lo, hi, tol=1e-9):
    """min c x over {rows, lo <= x <= hi} by enumerating basic solutions.

    ``rows`` as (a, sense, b) with sense in "=", "<=", ">="; bounded boxes only.
    Returns the optimal value or None when infeasible.
    """
    n = len(c)
    cons = []  # (a, b, is_equality) as a x (<=|=) b
    for a, sense, b in rows:
        a = np.asarray(a, float)
        if sense == ">=":
            cons.append((-a, -b, False))
        else:
            cons.append((a, b, sense == "="))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1
        cons.append((e, hi[j], False))
        cons.append((-e, -lo[j], False))
    # every vertex keeps all equalities active: take a maximal independent
    # subset of them and complete it with inequalities
    eq = []
    for i, cn in enumerate(cons):
        if cn[2] and np.linalg.matrix_rank(np.array([cons[j][0] for j in eq + [i]])) > len(eq):
            eq.append(i)
    ineq = [i for i, cn in enumerate(cons) if not cn[2]]
    best = None
    for extra in itertools.combinations(ineq, n - len(eq)):
        idx = eq + list(extra)
        A = np.array([cons[i][0] for i in idx])
        b = np.array([cons[i][1] for i in idx], float)
        if abs(np.linalg.det(A)) < 1e-10:
            continue
        x = np.linalg.solve(A, b)
        if all(cn[0] @ x <= cn[1] + tol and (not cn[2] or cn[0] @ x >= cn[1] - tol) for cn in cons):
            val = float(np.asarray(c) @ x)
            if best is None or val < best:
                best = val
    return best


def brute_dual_value(n, edges, weights, conflicts, lam):
    """z(lam) by enumerating spanning trees and (n-1)-stable sets."""
    lam = np.asarray(lam, float)
    w = np.asarray(weights, float)
    tree = brute_mst(n, edges, w - lam)
    ks = brute_kstab(len(edges), conflicts, n - 1, lam)
    if ks is None:
        return None
    return tree + ks[0]

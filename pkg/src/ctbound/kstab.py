"""Minimum-cost stable sets of fixed cardinality in the conflict graph.

The exact solver is a branch-and-cut on top of :mod:`ctbound.lp`: the LP holds
the cardinality row, one row per maximal clique (pairwise rows only for
conflicts no enumerated clique covers) and odd-cycle cuts separated at the
root node.
"""

from __future__ import annotations

import enum
import heapq
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .instance import ConflictGraph
from .lp import DualSimplex, LpModel

log = logging.getLogger(__name__)

INT_TOL = 1e-6
CUT_VIOLATION = 1e-6
CLIQUE_CAP = 200_000
MAX_CUT_ROUNDS = 30
MAX_CUTS_PER_ROUND = 50
ORTHO_THRESHOLD = 0.01
POOL_CAP = 2000


class KstabStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    TIME_LIMIT = "TimeLimit"


@dataclass
class KstabQuery:
    conflict_graph: ConflictGraph
    k: int
    costs: np.ndarray
    fixed_one: frozenset = field(default_factory=frozenset)
    fixed_zero: frozenset = field(default_factory=frozenset)
    budget: float | None = None

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=float)
        self.fixed_one = frozenset(self.fixed_one)
        self.fixed_zero = frozenset(self.fixed_zero)
        if self.costs.shape != (self.conflict_graph.n,):
            raise ValueError("one cost per conflict-graph vertex required")
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.fixed_one & self.fixed_zero:
            raise ValueError("fixed_one and fixed_zero overlap")


@dataclass
class KstabResult:
    status: KstabStatus
    best_set: frozenset | None
    value: float
    lower_bound: float
    nodes: int = 0
    cuts_added: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is KstabStatus.OPTIMAL

    def incidence(self, n: int) -> np.ndarray:
        y = np.zeros(n)
        if self.best_set:
            y[list(self.best_set)] = 1.0
        return y


@dataclass
class CliqueFamily:
    cliques: list
    truncated: bool = False


@dataclass(frozen=True)
class OddCycle:
    vertices: tuple

    def __post_init__(self):
        if len(self.vertices) < 3 or len(self.vertices) % 2 == 0:
            raise ValueError("odd cycles need an odd number (>= 3) of vertices")

    @property
    def rhs(self) -> float:
        return (len(self.vertices) - 1) / 2

    def violation(self, y) -> float:
        return float(sum(y[u] for u in self.vertices)) - self.rhs


# -- cliques ---------------------------------------------------------------


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def enumerate_maximal_cliques(H: ConflictGraph, cap: int = CLIQUE_CAP) -> CliqueFamily:
    """Bron–Kerbosch with Tomita pivoting over bitmask vertex sets."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    nbr = H.masks
    found: list[tuple[int, ...]] = []
    truncated = False

    def expand(r: int, p: int, x: int) -> bool:
        nonlocal truncated
        if not p and not x:
            if len(found) >= cap:
                truncated = True
                return False
            found.append(tuple(_bits(r)))
            return True
        px = p | x
        pivot = max(_bits(px), key=lambda u: ((p & nbr[u]).bit_count(), -u))
        for v in _bits(p & ~nbr[pivot]):
            bit = 1 << v
            if not expand(r | bit, p & nbr[v], x & nbr[v]):
                return False
            p &= ~bit
            x |= bit
        return True

    expand(0, (1 << H.n) - 1, 0)
    return CliqueFamily(found, truncated)


def clique_cover_bound(H: ConflictGraph, free: int) -> int:
    """Size of a greedy clique partition of the vertices in ``free``; an upper
    bound on the stability number of the induced subgraph."""
    nbr = H.masks
    cliques: list[int] = []
    common: list[int] = []
    for v in _bits(free):
        for c in range(len(cliques)):
            if (common[c] >> v) & 1:
                cliques[c] |= 1 << v
                common[c] &= nbr[v]
                break
        else:
            cliques.append(1 << v)
            common.append(nbr[v] & free)
    return len(cliques)


# -- odd cycles ------------------------------------------------------------


def _odd_cycle_from_walk(walk):
    """Reduce a closed walk of odd length (vertex list, first == last omitted)
    to a simple odd cycle."""
    walk = list(walk)
    while True:
        seen = {}
        split = None
        for pos, v in enumerate(walk):
            if v in seen:
                split = (seen[v], pos)
                break
            seen[v] = pos
        if split is None:
            return walk
        i, j = split
        inner = walk[i:j]
        outer = walk[:i] + walk[j:]
        walk = inner if len(inner) % 2 == 1 else outer


def separate_odd_cycles(H: ConflictGraph, y, max_cuts: int = MAX_CUTS_PER_ROUND,
                        ortho_threshold: float = ORTHO_THRESHOLD) -> list[OddCycle]:
    """Violated odd-cycle inequalities for the fractional point ``y``.

    Shortest ``(v,0) -> (v,1)`` paths in the bilayer graph with arc weights
    ``max(0, 1 - y_u - y_v)`` give odd closed walks; those of weight below one
    are reduced to simple odd cycles. The most violated cycle comes first,
    followed by cycles whose normalized inner product with it is at most
    ``ortho_threshold``.
    """
    y = np.asarray(y, dtype=float)
    if H.edge_count == 0:
        return []
    indptr, indices = H.csr
    candidates = {}
    sources = [v for v in range(H.n) if y[v] > INT_TOL and H.degree(v) >= 2]
    for s in sources:
        dist, pred = kernels.bilayer_paths(indptr, indices, y, s)
        target = 2 * s + 1
        if not dist[target] < 1.0 - CUT_VIOLATION:
            continue
        walk = []
        node = target
        while node != 2 * s:
            node = int(pred[node])
            walk.append(node // 2)
        walk.reverse()  # starts at s, ends just before returning to s
        cyc = _odd_cycle_from_walk(walk)
        if len(cyc) < 3:
            continue
        key = frozenset(cyc)
        if key in candidates:
            continue
        c = OddCycle(tuple(cyc))
        viol = c.violation(y)
        if viol > CUT_VIOLATION:
            candidates[key] = (viol, c)
    if not candidates:
        return []
    ranked = sorted(candidates.values(), key=lambda t: (-t[0], len(t[1].vertices), sorted(t[1].vertices)))
    head = ranked[0][1]
    hset = set(head.vertices)
    out = [head]
    for _, c in ranked[1:]:
        if len(out) >= max_cuts:
            break
        inner = len(hset & set(c.vertices)) / math.sqrt(len(hset) * len(c.vertices))
        if inner <= ortho_threshold:
            out.append(c)
    return out


# -- greedy ----------------------------------------------------------------


def _fixing_masks(H: ConflictGraph, fixed_one, fixed_zero):
    one = 0
    for v in fixed_one:
        one |= 1 << v
    blocked = 0
    for v in fixed_one:
        blocked |= H.masks[v]
    zero = 0
    for v in fixed_zero:
        zero |= 1 << v
    full = (1 << H.n) - 1
    free = full & ~one & ~blocked & ~zero
    return one, blocked, free


def greedy_kstab(query: KstabQuery) -> frozenset | None:
    """Cheapest-first construction with a clique-cover lookahead."""
    H = query.conflict_graph
    one, blocked, free = _fixing_masks(H, query.fixed_one, query.fixed_zero)
    if one & blocked:
        return None
    chosen = set(query.fixed_one)
    need = query.k - len(chosen)
    if need < 0:
        return None
    order = sorted(_bits(free), key=lambda v: (query.costs[v], v))
    for v in order:
        if need == 0:
            break
        if not (free >> v) & 1:
            continue
        rest = free & ~(1 << v) & ~H.masks[v]
        if clique_cover_bound(H, rest) < need - 1:
            continue
        chosen.add(v)
        need -= 1
        free = rest
    if need:
        return None
    return frozenset(chosen)


# -- branch and cut --------------------------------------------------------


class KstabSolver:
    """Exact solver bound to one conflict graph and cardinality.

    Maximal cliques are enumerated once; odd-cycle cuts found at any root
    are kept in a pool (they are valid for every cost vector) and seed later
    calls.
    """

    def __init__(self, H: ConflictGraph, k: int, clique_cap: int = CLIQUE_CAP, trace: bool = False):
        self.H = H
        self.k = k
        self.trace = trace
        self.cliques = enumerate_maximal_cliques(H, clique_cap) if H.edge_count else CliqueFamily([])
        rows = []
        covered = set()
        for q in self.cliques.cliques:
            if len(q) < 2:
                continue
            coef = np.zeros(H.n)
            coef[list(q)] = 1.0
            rows.append((coef, "<=", 1.0))
            if self.cliques.truncated:
                covered.update((a, b) for a in q for b in q if a < b)
        if self.cliques.truncated:
            for a, b in H.edges:
                if (a, b) not in covered:
                    coef = np.zeros(H.n)
                    coef[[a, b]] = 1.0
                    rows.append((coef, "<=", 1.0))
        self.base_rows = [(np.ones(H.n), "=", float(k))] + rows
        self.pool: dict[frozenset, OddCycle] = {}

    def _cycle_row(self, c: OddCycle):
        coef = np.zeros(self.H.n)
        coef[list(c.vertices)] = 1.0
        return coef, "<=", c.rhs

    def solve(self, costs, fixed_one=(), fixed_zero=(), budget: float | None = None,
              incumbent=None) -> KstabResult:
        return solve_kstab(KstabQuery(self.H, self.k, costs, frozenset(fixed_one), frozenset(fixed_zero), budget),
                           solver=self, incumbent=incumbent)


@dataclass(order=True)
class _Node:
    key: tuple
    fix_one: frozenset = field(compare=False)
    fix_zero: frozenset = field(compare=False)
    bound: float = field(compare=False)
    basis: object = field(compare=False)
    y: np.ndarray = field(compare=False)


def _bounds_for(H, base_lo, base_hi, fix_one, fix_zero):
    lo = base_lo.copy()
    hi = base_hi.copy()
    for v in fix_zero:
        hi[v] = 0.0
    for v in fix_one:
        lo[v] = 1.0
        for u in H.adj[v]:
            hi[u] = 0.0
    return lo, hi


def solve_kstab(query: KstabQuery, solver: KstabSolver | None = None, incumbent=None) -> KstabResult:
    """Exact ``min costs @ y`` over stable sets of size ``k`` respecting the
    fixings, or the best bound found within ``query.budget`` seconds."""
    t0 = time.monotonic()
    H = query.conflict_graph
    k = query.k
    costs = query.costs
    n = H.n
    deadline = None if query.budget is None else t0 + query.budget

    def infeasible():
        return KstabResult(KstabStatus.INFEASIBLE, None, math.inf, math.inf)

    one, blocked, free = _fixing_masks(H, query.fixed_one, query.fixed_zero)
    if one & blocked or k > n or len(query.fixed_one) > k:
        return infeasible()
    need = k - len(query.fixed_one)
    if clique_cover_bound(H, free) < need:
        return infeasible()

    # no conflicts among free vertices: pick the cheapest
    free_list = list(_bits(free))
    if not any(H.masks[v] & free for v in free_list):
        if len(free_list) < need:
            return infeasible()
        pick = sorted(free_list, key=lambda v: (costs[v], v))[:need]
        best = frozenset(query.fixed_one) | frozenset(pick)
        val = float(costs[sorted(best)].sum())
        return KstabResult(KstabStatus.OPTIMAL, best, val, val, 1, 0)

    if solver is None or solver.H is not H or solver.k != k:
        solver = KstabSolver(H, k)
    integral_costs = bool(np.all(costs == np.round(costs)))

    inc_set = greedy_kstab(query)
    inc_val = math.inf if inc_set is None else float(costs[sorted(inc_set)].sum())
    if incumbent is not None:
        cand = frozenset(incumbent)
        if (len(cand) == k and H.is_stable(cand) and query.fixed_one <= cand and not (cand & query.fixed_zero)):
            val = float(costs[sorted(cand)].sum())
            if val < inc_val:
                inc_set, inc_val = cand, val

    def prunable(bound):
        if integral_costs:
            return math.ceil(bound - 1e-6) >= inc_val - 1e-9
        return bound >= inc_val - 1e-9 * max(1.0, abs(inc_val))

    base_lo = np.zeros(n)
    base_hi = np.ones(n)
    rows = list(solver.base_rows) + [solver._cycle_row(c) for c in solver.pool.values()]
    lp = DualSimplex(LpModel(costs, rows, base_lo, base_hi))
    root_lo, root_hi = _bounds_for(H, base_lo, base_hi, query.fixed_one, query.fixed_zero)
    for v in range(n):
        lp.set_bounds(v, root_lo[v], root_hi[v])

    nodes = 1
    cuts = 0
    out = lp.solve()
    if not out.optimal:
        return infeasible()
    # root cut loop
    for _ in range(MAX_CUT_ROUNDS):
        y = out.primal
        if _is_integral(y) or prunable(out.value):
            break
        if deadline is not None and time.monotonic() > deadline:
            break
        found = separate_odd_cycles(H, y)
        new = [c for c in found if frozenset(c.vertices) not in solver.pool]
        if not new:
            break
        for c in new:
            if len(solver.pool) < POOL_CAP:
                solver.pool[frozenset(c.vertices)] = c
        lp.add_rows([solver._cycle_row(c) for c in new])
        cuts += len(new)
        prev = out.value
        out = lp.solve()
        if not out.optimal:
            return infeasible()
        if out.value - prev < 1e-9:
            break

    counter = 0
    open_nodes: list[_Node] = []

    def consider(node_lp, fix_one, fix_zero, depth):
        nonlocal inc_set, inc_val, counter
        if not node_lp.optimal or prunable(node_lp.value):
            return
        y = node_lp.primal
        if _is_integral(y):
            sel = frozenset(int(v) for v in np.flatnonzero(y > 0.5))
            val = float(costs[sorted(sel)].sum())
            if val < inc_val:
                inc_set, inc_val = sel, val
            return
        counter += 1
        heapq.heappush(open_nodes, _Node((-depth, node_lp.value, counter), fix_one, fix_zero, node_lp.value, node_lp.basis, y))

    consider(out, query.fixed_one, query.fixed_zero, 0)
    status = KstabStatus.OPTIMAL
    while open_nodes:
        if deadline is not None and time.monotonic() > deadline:
            status = KstabStatus.TIME_LIMIT
            break
        node = heapq.heappop(open_nodes)
        if prunable(node.bound):
            continue
        frac = np.abs(node.y - 0.5)
        cand = np.flatnonzero(np.minimum(node.y, 1 - node.y) > INT_TOL)
        j = int(cand[np.argmin(frac[cand])])
        depth = -node.key[0] + 1
        if solver.trace:
            log.debug("node depth=%d bound=%.6f incumbent=%s", depth - 1, node.bound, inc_val)
        for val in (1, 0):
            f1 = node.fix_one | {j} if val else node.fix_one
            f0 = node.fix_zero if val else node.fix_zero | {j}
            o, b, fr = _fixing_masks(H, f1, f0)
            if o & b or clique_cover_bound(H, fr) < k - len(f1):
                continue
            lo, hi = _bounds_for(H, base_lo, base_hi, f1, f0)
            for v in range(n):
                lp.set_bounds(v, lo[v], hi[v])
            lp.restore(node.basis)
            nodes += 1
            consider(lp.solve(), f1, f0, depth)

    if status is KstabStatus.TIME_LIMIT:
        lb = min([nd.bound for nd in open_nodes] + [inc_val])
        val = inc_val if inc_set is not None else math.inf
        return KstabResult(status, inc_set, val, lb, nodes, cuts)
    if inc_set is None:
        return KstabResult(KstabStatus.INFEASIBLE, None, math.inf, math.inf, nodes, cuts)
    return KstabResult(KstabStatus.OPTIMAL, inc_set, inc_val, inc_val, nodes, cuts)


def _is_integral(y) -> bool:
    return bool(np.all(np.minimum(np.abs(y), np.abs(1 - y)) <= INT_TOL))


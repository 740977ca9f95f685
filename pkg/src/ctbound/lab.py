"""Brute-force oracles on tiny graphs and checks of the polyhedral facts
relating the exact / at-least / at-most cardinality stable set polytopes.

Everything here enumerates, so every entry point carries a size guard.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .instance import ConflictGraph, Instance, build_conflict_graph
from .kstab import KstabQuery, solve_kstab
from .lp import LpModel, LpStatus, solve_min

KSTAB_GUARD = 24
TREE_GUARD = 9
HULL_TOL = 1e-7

MODES = ("exact", "at_least", "at_most")
KINDS = {"exact": "kstab_exact_k", "at_least": "kstab_at_least_k", "at_most": "kstab_at_most_k"}
THEOREMS = ("2.1i", "2.1ii", "2.3", "2.4")


class GuardError(ValueError):
    """Input exceeds the enumeration size guard."""


class OracleInfeasible(Exception):
    pass


@dataclass(frozen=True)
class IncidenceFamily:
    vectors: np.ndarray  # (count, n) of 0/1
    kind: str

    @property
    def n(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return self.vectors.shape[0]

    def as_sets(self) -> set[frozenset]:
        return {frozenset(np.flatnonzero(v).tolist()) for v in self.vectors}


def _masks_to_vectors(masks, n) -> np.ndarray:
    masks = np.asarray(masks, dtype=np.int64)
    if masks.size == 0:
        return np.zeros((0, n), dtype=np.int8)
    bits = (masks[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
    return bits.astype(np.int8)


def enumerate_kstabs(H: ConflictGraph, k: int, mode: str = "exact") -> IncidenceFamily:
    """All stable sets of size ``k`` (``exact``), ``>= k`` or ``<= k``."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if H.n > KSTAB_GUARD:
        raise GuardError(f"conflict graph has {H.n} vertices; enumeration is capped at {KSTAB_GUARD}")
    lo, hi = {"exact": (k, k), "at_least": (k, H.n), "at_most": (0, k)}[mode]
    masks = kernels.stable_sets(H.n, np.array(H.masks, dtype=np.int64), lo, hi)
    return IncidenceFamily(_masks_to_vectors(masks, H.n), KINDS[mode])


def enumerate_spanning_trees(n_vertices: int, edges) -> list[tuple[int, ...]]:
    """Every spanning tree as a sorted tuple of edge indices (backtracking
    in index order, pruned on cycles and on too few remaining edges)."""
    m = len(edges)
    need = n_vertices - 1
    out = []
    parent = list(range(n_vertices))

    def find(u):
        while parent[u] != u:
            u = parent[u]
        return u

    chosen = []

    def rec(i):
        if len(chosen) == need:
            out.append(tuple(chosen))
            return
        if m - i < need - len(chosen):
            return
        u, v = edges[i]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            chosen.append(i)
            rec(i + 1)
            chosen.pop()
            parent[ru] = ru
        rec(i + 1)

    if need == 0:
        return [()]
    rec(0)
    return out


@dataclass
class TreeEnumeration:
    family: IncidenceFamily
    opt: float | None
    opt_tree: tuple[int, ...] | None
    n_spanning_trees: int

    @property
    def feasible(self) -> bool:
        return self.opt is not None


def _tree_guard(instance: Instance):
    if instance.n_vertices > TREE_GUARD:
        raise GuardError(f"{instance.n_vertices} vertices; tree enumeration is capped at {TREE_GUARD}")


def enumerate_stable_spanning_trees(instance: Instance) -> TreeEnumeration:
    _tree_guard(instance)
    trees = enumerate_spanning_trees(instance.n_vertices, instance.graph.edges)
    stable = [t for t in trees if instance.is_stable(t)]
    m = instance.n_edges
    vecs = np.zeros((len(stable), m), dtype=np.int8)
    for i, t in enumerate(stable):
        vecs[i, list(t)] = 1
    fam = IncidenceFamily(vecs, "stable_spanning_tree")
    if not stable:
        return TreeEnumeration(fam, None, None, len(trees))
    w = instance.graph.w
    vals = vecs @ w
    best = int(np.argmin(vals))
    return TreeEnumeration(fam, float(vals[best]), stable[best], len(trees))


def brute_force_opt(instance: Instance) -> float | None:
    """Optimal stable spanning tree weight, ``None`` when none exists."""
    return enumerate_stable_spanning_trees(instance).opt


# --- convex hull membership -------------------------------------------------

def hull_distance(point, vectors) -> float:
    """Least L1 residual of ``point`` against convex combinations of the rows
    of ``vectors``; zero (up to LP tolerance) iff the point is in the hull."""
    vectors = np.asarray(vectors, dtype=float)
    point = np.asarray(point, dtype=float)
    count, n = vectors.shape
    if count == 0:
        return math.inf
    # columns: theta (count), s_plus (n), s_minus (n)
    nv = count + 2 * n
    obj = np.concatenate([np.zeros(count), np.ones(2 * n)])
    rows = [(np.concatenate([np.ones(count), np.zeros(2 * n)]), "=", 1.0)]
    eye = np.eye(n)
    for j in range(n):
        rows.append((np.concatenate([vectors[:, j], eye[j], -eye[j]]), "=", float(point[j])))
    upper = np.concatenate([np.ones(count), np.full(2 * n, np.inf)])
    out = solve_min(LpModel(obj, rows, np.zeros(nv), upper))
    if out.status is not LpStatus.OPTIMAL:
        return math.inf
    return max(out.value, 0.0)


def membership_in_hull(point, family: IncidenceFamily | np.ndarray, tol: float = HULL_TOL) -> bool:
    vectors = family.vectors if isinstance(family, IncidenceFamily) else family
    return hull_distance(point, vectors) <= tol


# --- polyhedral checks -------------------------------------------------------

@dataclass
class TheoremReport:
    theorem: str
    instances: int = 0
    checks: int = 0
    violations: int = 0
    witness: dict | None = None

    def record(self, ok: bool, witness: dict | None = None):
        self.checks += 1
        if not ok:
            self.violations += 1
            if self.witness is None:
                self.witness = witness

    def merge(self, other: "TheoremReport"):
        self.instances += other.instances
        self.checks += other.checks
        self.violations += other.violations
        if self.witness is None:
            self.witness = other.witness

    def to_dict(self) -> dict:
        return {"theorem": self.theorem, "instances": self.instances, "checks": self.checks,
                "violations": self.violations, "witness": self.witness}


def _random_combination(rng, vectors, max_support=3):
    """A random convex combination and the rows it uses."""
    count = vectors.shape[0]
    size = int(rng.integers(1, min(max_support, count) + 1))
    idx = rng.choice(count, size=size, replace=False)
    weights = rng.dirichlet(np.ones(size))
    return weights @ vectors[idx].astype(float), vectors[idx]


def _keys(vectors) -> set[bytes]:
    return {np.asarray(v, dtype=np.int8).tobytes() for v in vectors}


def _in_hull(point, support, family: IncidenceFamily, keys: set[bytes]) -> bool:
    # a combination of family members is trivially inside; anything else goes to the LP
    if all(np.asarray(v, dtype=np.int8).tobytes() in keys for v in support):
        return True
    return membership_in_hull(point, family)


def _lp_point(rng, blocks, n, card=None):
    """A vertex of the intersection of the hulls of ``blocks`` (optionally
    with the coordinate sum fixed to ``card``) under a random objective.
    Returns ``None`` when the intersection is empty."""
    c = rng.normal(size=n)
    sizes = [b.shape[0] for b in blocks]
    total = sum(sizes)
    offsets = np.cumsum([0] + sizes)
    first = blocks[0].astype(float)
    obj = np.zeros(total)
    obj[:sizes[0]] = first @ c
    rows = []
    for bi, size in enumerate(sizes):
        coef = np.zeros(total)
        coef[offsets[bi]:offsets[bi + 1]] = 1.0
        rows.append((coef, "=", 1.0))
    for bi in range(1, len(blocks)):
        for j in range(n):
            coef = np.zeros(total)
            coef[:sizes[0]] = first[:, j]
            coef[offsets[bi]:offsets[bi + 1]] = -blocks[bi][:, j]
            rows.append((coef, "=", 0.0))
    if card is not None:
        coef = np.zeros(total)
        coef[:sizes[0]] = first.sum(axis=1)
        rows.append((coef, "=", float(card)))
    out = solve_min(LpModel(obj, rows))
    if not out.optimal:
        return None
    return out.primal[:sizes[0]] @ first


def check_intersection_theorems(H: ConflictGraph, k: int, samples: int = 10, seed=None,
                                rng: np.random.Generator | None = None) -> dict[str, TheoremReport]:
    """Sampled checks of the hull identities for one ``(H, k)``.

    * 2.1i: points of conv(F_up) lying in conv(F_down) (and vice versa) are
      in conv(F_exact); random vertices of conv(F_up) & conv(F_down) too.
    * 2.1ii: points of conv(F_up) or conv(F_down) with coordinate sum ``k``
      are in conv(F_exact).
    * 2.3: the 0/1 points common to both hulls are exactly the kstabs.
    * 2.4: ``alpha - 1 <= dim <= n - 1`` when ``alpha >= k + 1``.
    """
    rng = rng if rng is not None else np.random.default_rng(seed)
    n = H.n
    exact = enumerate_kstabs(H, k, "exact")
    up = enumerate_kstabs(H, k, "at_least")
    down = enumerate_kstabs(H, k, "at_most")
    reports = {t: TheoremReport(t, instances=1) for t in THEOREMS}
    ctx = {"n": n, "edges": sorted(H.edges), "k": k}

    def witness(point, note):
        return {**ctx, "point": [round(float(v), 12) for v in point], "note": note}

    # 2.3 as a set identity on incidence vectors
    up_sets, down_sets, exact_sets = up.as_sets(), down.as_sets(), exact.as_sets()
    reports["2.3"].record(exact_sets == (up_sets & down_sets), {**ctx, "note": "F != F_up & F_down"})

    if len(exact):
        kvecs = up.vectors[up.vectors.sum(axis=1) == k]
        keys = {"exact": _keys(exact.vectors), "up": _keys(up.vectors), "down": _keys(down.vectors)}
        for _ in range(samples):
            # F_exact members are in both larger hulls
            p, sup = _random_combination(rng, exact.vectors)
            ok = _in_hull(p, sup, up, keys["up"]) and _in_hull(p, sup, down, keys["down"])
            reports["2.1i"].record(ok, witness(p, "conv(F) not inside conv(F_up) & conv(F_down)"))
            for src, other, okey in ((up, down, "down"), (down, up, "up")):
                pool = src.vectors
                if rng.random() < 0.5 and len(kvecs):
                    pool = kvecs
                p, sup = _random_combination(rng, pool)
                if _in_hull(p, sup, other, keys[okey]):
                    reports["2.1i"].record(_in_hull(p, sup, exact, keys["exact"]),
                                           witness(p, "point of both hulls outside conv(F)"))
        for _ in range(max(1, samples // 5)):
            p = _lp_point(rng, [up.vectors, down.vectors], n)
            if p is not None:
                reports["2.1i"].record(membership_in_hull(p, exact), witness(p, "intersection vertex outside conv(F)"))
            for src in (up, down):
                p = _lp_point(rng, [src.vectors], n, card=k)
                if p is not None:
                    reports["2.1ii"].record(membership_in_hull(p, exact),
                                            witness(p, f"{src.kind} point with sum k outside conv(F)"))
    else:
        # no kstab: both intersections must be empty as well
        reports["2.1i"].record(_lp_point(rng, [up.vectors, down.vectors], n) is None if len(up) else True,
                               {**ctx, "note": "nonempty intersection without kstabs"})
        reports["2.1ii"].record(len(up) == 0, {**ctx, "note": "F_up nonempty without kstabs"})

    alpha = max((int(v.sum()) for v in up.vectors), default=None)
    if alpha is None:
        alpha = max(int(v.sum()) for v in down.vectors)
    if alpha >= k + 1:
        dim = polytope_dimension_of(exact)
        reports["2.4"].record(alpha - 1 <= dim <= n - 1, {**ctx, "alpha": alpha, "dim": dim})
    return reports


def _exact_rank(rows: list[list[int]]) -> int:
    """Rank over the rationals by fraction-free elimination on integers."""
    mat = [list(r) for r in rows if any(r)]
    if not mat:
        return 0
    ncols = len(mat[0])
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(mat)) if mat[i][col] != 0), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        p = mat[rank]
        for i in range(rank + 1, len(mat)):
            f = mat[i][col]
            if f:
                row = [p[col] * mat[i][c] - f * p[c] for c in range(ncols)]
                g = math.gcd(*row)
                mat[i] = [v // g for v in row] if g > 1 else row
        rank += 1
        if rank == len(mat):
            break
    return rank


def polytope_dimension_of(family: IncidenceFamily) -> int:
    if len(family) == 0:
        raise ValueError("dimension of an empty family is undefined")
    base = family.vectors[0].astype(int)
    diffs = [(v.astype(int) - base).tolist() for v in family.vectors[1:]]
    return _exact_rank(diffs)


def polytope_dimension(H: ConflictGraph, k: int) -> int:
    """Affine dimension of the hull of the kstab incidence vectors."""
    return polytope_dimension_of(enumerate_kstabs(H, k, "exact"))


def stability_number(H: ConflictGraph) -> int:
    """Largest ``k`` for which the kstab oracle finds a feasible set."""
    zero = np.zeros(H.n)
    alpha = 0
    for k in range(1, H.n + 1):
        res = solve_kstab(KstabQuery(H, k, zero))
        if not res.optimal:
            break
        alpha = k
    return alpha


# --- bound oracles on tiny MSTCC instances -------------------------------------

def _tree_vectors(instance: Instance) -> np.ndarray:
    trees = enumerate_spanning_trees(instance.n_vertices, instance.graph.edges)
    vecs = np.zeros((len(trees), instance.n_edges), dtype=np.int8)
    for i, t in enumerate(trees):
        vecs[i, list(t)] = 1
    return vecs


def ld_bound_oracle(instance: Instance) -> float:
    """``min w @ x`` over conv(spanning trees) & conv(kstabs of H): the
    best bound any multipliers can give, computed as one LP over the two
    enumerated families."""
    _tree_guard(instance)
    trees = _tree_vectors(instance)
    kst = enumerate_kstabs(build_conflict_graph(instance), instance.k, "exact").vectors
    if len(kst) == 0:
        raise OracleInfeasible("no kstab in the conflict graph")
    T, S, m = len(trees), len(kst), instance.n_edges
    w = instance.graph.w
    obj = np.concatenate([trees @ w, np.zeros(S)])
    rows = [(np.concatenate([np.ones(T), np.zeros(S)]), "=", 1.0),
            (np.concatenate([np.zeros(T), np.ones(S)]), "=", 1.0)]
    for e in range(m):
        rows.append((np.concatenate([trees[:, e], -kst[:, e]]).astype(float), "=", 0.0))
    out = solve_min(LpModel(obj, rows))
    if out.status is LpStatus.INFEASIBLE:
        raise OracleInfeasible("spanning tree and kstab hulls do not meet")
    return float(out.value)


def subtour_lp_value(instance: Instance) -> float:
    """Continuous relaxation of the subtour formulation with every subtour
    row materialized: ``x(E(S)) <= |S|-1`` for all proper ``S`` with an edge
    inside, ``x(E) = |V|-1``, ``x_e + x_f <= 1`` per conflict, ``0 <= x <= 1``."""
    _tree_guard(instance)
    n, m = instance.n_vertices, instance.n_edges
    edges = instance.graph.edges
    rows = [(np.ones(m), "=", float(n - 1))]
    for size in range(2, n):
        for S in itertools.combinations(range(n), size):
            s = set(S)
            coef = np.array([1.0 if (u in s and v in s) else 0.0 for u, v in edges])
            if coef.any():
                rows.append((coef, "<=", float(size - 1)))
    for a, b in instance.conflict_pairs:
        coef = np.zeros(m)
        coef[a] = coef[b] = 1.0
        rows.append((coef, "<=", 1.0))
    out = solve_min(LpModel(instance.graph.w, rows))
    if out.status is LpStatus.INFEASIBLE:
        raise OracleInfeasible("subtour relaxation is infeasible")
    return float(out.value)


# --- corpora ---------------------------------------------------------------

def all_graphs(n: int):
    """Every labelled graph on ``n`` vertices (no isomorphism reduction)."""
    pairs = list(itertools.combinations(range(n), 2))
    for bits in range(1 << len(pairs)):
        yield ConflictGraph(n, [p for i, p in enumerate(pairs) if (bits >> i) & 1])


def random_graph(rng: np.random.Generator, n: int, density: float | None = None) -> ConflictGraph:
    if density is None:
        density = float(rng.uniform(0.1, 0.7))
    pairs = [p for p in itertools.combinations(range(n), 2) if rng.random() < density]
    return ConflictGraph(n, pairs)


def _alpha_from_enumeration(H: ConflictGraph) -> int:
    masks = kernels.stable_sets(H.n, np.array(H.masks, dtype=np.int64), 0, H.n)
    return max(int(m).bit_count() for m in masks.tolist())


@dataclass
class CorpusReport:
    graphs: int = 0
    pairs: int = 0
    reports: dict = field(default_factory=lambda: {t: TheoremReport(t) for t in THEOREMS})

    @property
    def violations(self) -> int:
        return sum(r.violations for r in self.reports.values())

    def to_dict(self) -> dict:
        return {"graphs": self.graphs, "pairs": self.pairs, "violations": self.violations,
                "theorems": [r.to_dict() for r in self.reports.values()]}


def run_theorem_corpus(max_exhaustive_n: int = 5, random_count: int = 0, random_n=(6, 8),
                       samples: int = 2, seed: int = 0, alpha_via_oracle: bool = False) -> CorpusReport:
    """Exhaustive graphs on ``1..max_exhaustive_n`` vertices plus
    ``random_count`` random graphs, each with every ``k`` in ``1..alpha``."""
    rng = np.random.default_rng(seed)
    corpus = CorpusReport()

    def graphs():
        for n in range(1, max_exhaustive_n + 1):
            yield from all_graphs(n)
        for _ in range(random_count):
            yield random_graph(rng, int(rng.integers(random_n[0], random_n[1] + 1)))

    for H in graphs():
        alpha = stability_number(H) if alpha_via_oracle else _alpha_from_enumeration(H)
        corpus.graphs += 1
        for k in range(1, alpha + 1):
            corpus.pairs += 1
            for t, r in check_intersection_theorems(H, k, samples, rng=rng).items():
                corpus.reports[t].merge(r)
    return corpus

"""The decomposition dual function.

For multipliers ``lam`` over the edges,

    z(lam) = min over spanning trees x of (w - lam) @ x
           + min over stable sets y of size |V|-1 of lam @ y,

a lower bound on every stable spanning tree weight. ``y - x`` is a
subgradient at ``lam``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .instance import Instance, build_conflict_graph
from .kstab import KstabResult, KstabSolver, KstabStatus
from .mst import EdgeFixing, Infeasible, TreeSolution, min_spanning_tree


class InstanceInfeasible(Exception):
    """The instance has no stable spanning tree."""


@dataclass
class DualPoint:
    lam: np.ndarray
    tree: TreeSolution
    kstab: KstabResult
    value: float
    subgradient: np.ndarray
    phase: str = ""

    @property
    def exact(self) -> bool:
        return self.kstab.optimal

    @property
    def x(self) -> np.ndarray:
        return self.tree.incidence(self.lam.size)

    @property
    def y(self) -> np.ndarray:
        return self.kstab.incidence(self.lam.size)


@dataclass
class TraceEntry:
    phase: str
    value: float
    exact: bool
    elapsed: float


class Evaluator:
    """Evaluates ``z`` on one instance, sharing the kstab solver (cliques and
    cut pool) across calls and recording every value it produces.

    Subproblem solutions that happen to be stable spanning trees are kept as
    an upper bound, which lets callers stop once the bound meets it.
    """

    def __init__(self, instance: Instance, trace: bool = False):
        self.instance = instance
        self.H = build_conflict_graph(instance)
        self.w = instance.graph.w
        self.solver = KstabSolver(self.H, instance.k, trace=trace)
        self.integral = instance.integral_weights
        self.upper_bound = math.inf
        self.upper_tree: frozenset | None = None
        self.trace: list[TraceEntry] = []
        self.evaluations = 0
        self._t0 = time.monotonic()
        self._last_y: frozenset | None = None

    def _note_primal(self, edges: frozenset):
        if len(edges) != self.instance.k or not self.instance.is_stable(edges):
            return
        # a stable edge set of size |V|-1 is a tree iff it is acyclic
        try:
            min_spanning_tree(self.instance.graph, self.w, EdgeFixing(forced_in=edges))
        except Infeasible:
            return
        val = float(self.w[sorted(edges)].sum())
        if val < self.upper_bound:
            self.upper_bound = val
            self.upper_tree = edges

    def evaluate(self, lam, budget: float | None = None, phase: str = "", incumbent=None) -> DualPoint:
        lam = np.asarray(lam, dtype=float)
        if incumbent is None:
            incumbent = self._last_y
        tree = min_spanning_tree(self.instance.graph, self.w - lam)
        ks = self.solver.solve(lam, budget=budget, incumbent=incumbent)
        if ks.status is KstabStatus.INFEASIBLE:
            raise InstanceInfeasible("no stable set of size |V|-1 exists in the conflict graph")
        ypart = ks.value if ks.optimal else ks.lower_bound
        value = tree.value + ypart
        x = tree.incidence(lam.size)
        y = ks.incidence(lam.size) if ks.best_set is not None else x
        point = DualPoint(lam.copy(), tree, ks, float(value), y - x, phase)
        self.evaluations += 1
        self.trace.append(TraceEntry(phase, point.value, point.exact, time.monotonic() - self._t0))
        self._note_primal(tree.edge_set)
        if ks.best_set is not None:
            self._last_y = ks.best_set
            self._note_primal(ks.best_set)
        return point

    def rounded(self, bound: float) -> float:
        return float(math.ceil(bound - 1e-9)) if self.integral else bound

    def gap_closed(self, bound: float) -> bool:
        """True once ``bound`` provably equals the optimum."""
        if not math.isfinite(self.upper_bound):
            return False
        return self.rounded(bound) >= self.upper_bound - 1e-9


def evaluate_dual(instance: Instance, lam, kstab_budget: float | None = None) -> DualPoint:
    """One-shot evaluation of ``z(lam)``; see :class:`Evaluator` for reuse."""
    return Evaluator(instance).evaluate(lam, kstab_budget)

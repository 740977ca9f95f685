"""Minimum spanning trees with edges forced in or out.

Forced-in edges are merged in the union-find before Kruskal runs, which is
the same as contracting them: any later edge between two already merged
super-vertices is skipped, so parallel edges created by the contraction never
both enter the tree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .instance import Graph


@dataclass(frozen=True)
class EdgeFixing:
    forced_in: frozenset = field(default_factory=frozenset)
    forced_out: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "forced_in", frozenset(self.forced_in))
        object.__setattr__(self, "forced_out", frozenset(self.forced_out))
        if self.forced_in & self.forced_out:
            raise ValueError("an edge cannot be forced both in and out")


NO_FIXING = EdgeFixing()


@dataclass(frozen=True)
class TreeSolution:
    edge_set: frozenset
    value: float

    def incidence(self, m: int) -> np.ndarray:
        x = np.zeros(m)
        x[list(self.edge_set)] = 1.0
        return x


class Infeasible(Exception):
    """No spanning tree respects the fixing."""


def _order(costs: np.ndarray) -> np.ndarray:
    # stable sort: equal costs stay in index order
    return np.argsort(costs, kind="stable").astype(np.int64)


def min_spanning_tree(graph: Graph, costs, fixing: EdgeFixing = NO_FIXING) -> TreeSolution:
    """Minimum-cost spanning tree of ``graph`` under ``fixing``.

    Raises :class:`Infeasible` when the forced-in edges close a cycle or the
    graph minus the forced-out edges is disconnected.
    """
    costs = np.asarray(costs, dtype=float)
    m = graph.edge_count
    if costs.shape != (m,):
        raise ValueError(f"expected {m} costs, got {costs.shape}")
    if not np.all(np.isfinite(costs)):
        raise ValueError("costs must be finite")
    state = np.zeros(m, dtype=np.int8)
    if fixing.forced_in:
        state[list(fixing.forced_in)] = 1
    if fixing.forced_out:
        state[list(fixing.forced_out)] = 2
    eu, ev = graph.endpoints
    chosen, flag = kernels.kruskal(graph.vertex_count, eu, ev, _order(costs), state)
    if flag == kernels.FORCED_CYCLE:
        raise Infeasible("forced-in edges contain a cycle")
    if flag == kernels.DISCONNECTED:
        raise Infeasible("graph without the forced-out edges is disconnected")
    edges = frozenset(int(e) for e in chosen)
    return TreeSolution(edges, float(costs[np.sort(chosen)].sum()))


def tree_value(tree: TreeSolution, costs) -> float:
    costs = np.asarray(costs, dtype=float)
    return float(costs[sorted(tree.edge_set)].sum())


def restricted_tree_value(graph: Graph, costs, edge: int, include: bool) -> float:
    """Optimal value with ``edge`` forced in (``include``) or out; ``inf`` when
    no such tree exists."""
    fixing = EdgeFixing(forced_in={edge}) if include else EdgeFixing(forced_out={edge})
    try:
        return min_spanning_tree(graph, costs, fixing).value
    except Infeasible:
        return float("inf")

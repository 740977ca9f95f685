"""Probing reductions run before the dual machinery.

Three tests are applied until nothing changes:

* mandatory edges: a bridge of the surviving graph lies in every spanning
  tree, so every edge in conflict with it can go; two mandatory edges in
  conflict prove infeasibility.
* forced exclusion: if contracting ``e`` and deleting everything that
  conflicts with ``e`` leaves a disconnected graph, no stable spanning tree
  uses ``e``.
* implied conflicts (optional, quadratic): same argument for a
  non-conflicting pair ``e, f`` taken together.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .instance import Graph, Instance, component_count

log = logging.getLogger(__name__)

MAX_ROUNDS = 50


@dataclass
class ReductionLog:
    deleted_edges: set = field(default_factory=set)
    mandatory_edges: set = field(default_factory=set)
    implied_conflicts: set = field(default_factory=set)
    infeasible: bool = False
    rounds: int = 0
    round_cap_hit: bool = False
    # surviving original edge indices, in the order of the reduced instance
    kept_edges: list = field(default_factory=list)

    @property
    def changed(self) -> bool:
        return bool(self.deleted_edges or self.implied_conflicts)

    def to_dict(self) -> dict:
        return {
            "deleted_edges": sorted(self.deleted_edges),
            "mandatory_edges": sorted(self.mandatory_edges),
            "implied_conflicts": sorted(sorted(p) for p in self.implied_conflicts),
            "infeasible": self.infeasible,
            "rounds": self.rounds,
            "round_cap_hit": self.round_cap_hit,
        }


def bridges(n: int, edges, alive) -> set:
    """Bridges among the ``alive`` edge indices (iterative Tarjan)."""
    adj = [[] for _ in range(n)]
    for idx in alive:
        u, v = edges[idx]
        adj[u].append((v, idx))
        adj[v].append((u, idx))
    disc = [-1] * n
    low = [0] * n
    out = set()
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            u, via, it = stack[-1]
            advanced = False
            for v, idx in it:
                if idx == via:
                    continue
                if disc[v] == -1:
                    disc[v] = low[v] = timer
                    timer += 1
                    stack.append((v, idx, iter(adj[v])))
                    advanced = True
                    break
                low[u] = min(low[u], disc[v])
            if advanced:
                continue
            stack.pop()
            if stack:
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[u])
                if low[u] > disc[parent]:
                    out.add(via)
    return out


class _State:
    def __init__(self, instance: Instance):
        self.n = instance.n_vertices
        self.edges = instance.graph.edges
        self.alive = set(range(instance.n_edges))
        self.nbr = [set() for _ in range(instance.n_edges)]
        for i, j in instance.conflict_pairs:
            self.nbr[i].add(j)
            self.nbr[j].add(i)

    def connected(self, removed=(), merged=()) -> bool:
        dead = set(range(len(self.edges))) - self.alive
        dead.update(removed)
        merged_pairs = [self.edges[e] for e in merged]
        return component_count(self.n, self.edges, dead, merged_pairs) == 1

    def delete(self, e):
        self.alive.discard(e)
        for f in self.nbr[e]:
            self.nbr[f].discard(e)
        self.nbr[e] = set()


def probe_mandatory(state: _State, rlog: ReductionLog) -> bool:
    """T1. Returns True when anything changed."""
    changed = False
    for e in sorted(bridges(state.n, state.edges, state.alive)):
        if e not in rlog.mandatory_edges:
            rlog.mandatory_edges.add(e)
            changed = True
    for e in sorted(rlog.mandatory_edges):
        for f in sorted(state.nbr[e]):
            if f in rlog.mandatory_edges:
                rlog.infeasible = True
                return True
            state.delete(f)
            rlog.deleted_edges.add(f)
            changed = True
    return changed


def probe_forced_exclusion(state: _State, rlog: ReductionLog) -> bool:
    """T2."""
    changed = False
    for e in sorted(state.alive):
        if not state.connected(removed=state.nbr[e], merged=[e]):
            if e in rlog.mandatory_edges:
                rlog.infeasible = True
                return True
            state.delete(e)
            rlog.deleted_edges.add(e)
            changed = True
            if not state.connected():
                rlog.infeasible = True
                return True
    return changed


def probe_implied_conflicts(state: _State, rlog: ReductionLog) -> bool:
    """T3."""
    changed = False
    alive = sorted(state.alive)
    for a, e in enumerate(alive):
        for f in alive[a + 1 :]:
            if f in state.nbr[e] or e not in state.alive or f not in state.alive:
                continue
            if not state.connected(removed=state.nbr[e] | state.nbr[f], merged=[e, f]):
                state.nbr[e].add(f)
                state.nbr[f].add(e)
                rlog.implied_conflicts.add(frozenset((e, f)))
                changed = True
    return changed


def probe(instance: Instance, enable_pairwise: bool = False) -> tuple[Instance | None, ReductionLog]:
    """Apply the probing tests to a fixpoint.

    Returns the reduced instance (edges renumbered; ``log.kept_edges`` maps
    back to the input) or ``None`` when infeasibility was proven.
    """
    state = _State(instance)
    rlog = ReductionLog()
    while True:
        if rlog.rounds >= MAX_ROUNDS:
            rlog.round_cap_hit = True
            log.warning("probing stopped at the %d-round cap", MAX_ROUNDS)
            break
        rlog.rounds += 1
        changed = probe_mandatory(state, rlog)
        if not rlog.infeasible:
            changed |= probe_forced_exclusion(state, rlog)
        if not rlog.infeasible and enable_pairwise:
            changed |= probe_implied_conflicts(state, rlog)
        if rlog.infeasible or not changed:
            break
    # a deleted edge is never also mandatory
    rlog.mandatory_edges -= rlog.deleted_edges
    if rlog.infeasible:
        return None, rlog
    kept = sorted(state.alive)
    rlog.kept_edges = kept
    if not rlog.deleted_edges and not rlog.implied_conflicts:
        return instance, rlog
    new_index = {e: i for i, e in enumerate(kept)}
    g = instance.graph
    graph = Graph(g.vertex_count, tuple(g.edges[e] for e in kept), tuple(g.weights[e] for e in kept))
    pairs = set()
    for e in kept:
        for f in state.nbr[e]:
            if f in new_index:
                pairs.add(frozenset((new_index[e], new_index[f])))
    return Instance(graph, frozenset(pairs), instance.name), rlog

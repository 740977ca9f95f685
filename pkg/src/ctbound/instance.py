"""Instances of the conflict-constrained spanning tree problem and their file formats.

Canonical format (whitespace separated, 0-based)::

    |V| |E| |C|
    u v w          # |E| edge lines
    i j            # |C| conflict lines, edge indices

The ``zhang`` and ``carrabs`` adapters read the two public benchmark
families. Their on-disk layout is not documented anywhere we could check, so
both are tolerant: conflicts may be edge-index pairs or vertex 4-tuples
``u1 v1 u2 v2``, and 1-based numbering is detected and shifted. ``zhang`` is
line oriented; ``carrabs`` reads a flat token stream, so headers and records
may be split across lines.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

FORMATS = ("canonical", "zhang", "carrabs", "auto")


class InstanceError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Graph:
    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.edges) != len(self.weights):
            raise InstanceError("one weight per edge required")
        seen = set()
        for idx, (u, v) in enumerate(self.edges):
            if u == v:
                raise InstanceError(f"edge {idx} is a self-loop")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise InstanceError(f"edge {idx} has an endpoint out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InstanceError(f"duplicate edge {key}")
            seen.add(key)
        if not all(np.isfinite(self.weights)):
            raise InstanceError("edge weights must be finite")

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def w(self) -> np.ndarray:
        arr = np.array(self.weights, dtype=float)
        arr.setflags(write=False)
        return arr

    @cached_property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        eu = np.array([e[0] for e in self.edges], dtype=np.int64)
        ev = np.array([e[1] for e in self.edges], dtype=np.int64)
        return eu, ev

    def is_connected(self, skip=()) -> bool:
        return component_count(self.vertex_count, self.edges, skip) <= 1


def component_count(n: int, edges, skip=(), merged=()) -> int:
    """Connected components of ``(range(n), edges - skip)`` after merging the
    endpoint pairs in ``merged``."""
    parent = list(range(n))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    comps = n
    for u, v in merged:
        a, b = find(u), find(v)
        if a != b:
            parent[a] = b
            comps -= 1
    skip = set(skip)
    for idx, (u, v) in enumerate(edges):
        if idx in skip:
            continue
        a, b = find(u), find(v)
        if a != b:
            parent[a] = b
            comps -= 1
    return comps


@dataclass(frozen=True)
class Instance:
    graph: Graph
    conflicts: frozenset = field(default_factory=frozenset)
    name: str = "instance"

    def __post_init__(self):
        m = self.graph.edge_count
        for pair in self.conflicts:
            i, j = tuple(pair) if len(pair) == 2 else (next(iter(pair)),) * 2
            if i == j:
                raise InstanceError("conflict references identical edges")
            if not (0 <= i < m and 0 <= j < m):
                raise InstanceError(f"conflict {sorted(pair)} references a missing edge")
        if self.graph.vertex_count == 0:
            raise InstanceError("graph has no vertices")
        if not self.graph.is_connected():
            raise InstanceError("graph is disconnected; no spanning tree exists")

    @classmethod
    def build(cls, n, edges, weights=None, conflicts=(), name="instance") -> "Instance":
        """Convenience constructor from plain sequences; ``weights`` default to 1."""
        edges = tuple((int(u), int(v)) for u, v in edges)
        if weights is None:
            weights = [1.0] * len(edges)
        pairs = set()
        for i, j in conflicts:
            if i == j:
                raise InstanceError("conflict references identical edges")
            pair = frozenset((int(i), int(j)))
            if pair in pairs:
                raise InstanceError(f"duplicate conflict {sorted(pair)}")
            pairs.add(pair)
        return cls(Graph(int(n), edges, tuple(float(w) for w in weights)), frozenset(pairs), name)

    @property
    def k(self) -> int:
        return self.graph.vertex_count - 1

    @property
    def n_vertices(self) -> int:
        return self.graph.vertex_count

    @property
    def n_edges(self) -> int:
        return self.graph.edge_count

    @cached_property
    def conflict_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(tuple(sorted(p)) for p in self.conflicts))

    @property
    def integral_weights(self) -> bool:
        return bool(np.all(self.graph.w == np.round(self.graph.w)))

    def is_stable(self, edge_set) -> bool:
        s = set(edge_set)
        return not any(i in s and j in s for i, j in self.conflict_pairs)


class ConflictGraph:
    """Graph H on the edge indices of G, adjacent when the edges conflict."""

    def __init__(self, n: int, pairs=()):
        self.n = n
        adj = [set() for _ in range(n)]
        for i, j in pairs:
            adj[i].add(j)
            adj[j].add(i)
        self.adj = tuple(frozenset(a) for a in adj)
        self.edges = tuple(sorted((min(i, j), max(i, j)) for i, j in {tuple(sorted(p)) for p in pairs}))

    @cached_property
    def masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << v for v in a) for a in self.adj)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indices = []
        for u in range(self.n):
            nb = sorted(self.adj[u])
            indices.extend(nb)
            indptr[u + 1] = indptr[u] + len(nb)
        return indptr, np.array(indices, dtype=np.int64)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    def is_stable(self, vertices) -> bool:
        s = set(vertices)
        return all(not (self.adj[u] & s) for u in s)

    def __repr__(self):
        return f"ConflictGraph(n={self.n}, edges={self.edge_count})"


def build_conflict_graph(instance: Instance) -> ConflictGraph:
    return ConflictGraph(instance.n_edges, instance.conflict_pairs)


# -- parsing -------------------------------------------------------------


def _lines(text):
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield lineno, body.split()


def _num(tok, lineno, kind=int):
    try:
        if kind is int:
            val = float(tok)
            if val != int(val):
                raise ValueError
            return int(val)
        return float(tok)
    except ValueError:
        raise InstanceError(f"expected a number, got {tok!r}", lineno) from None


def _header(tokens, lineno):
    if len(tokens) != 3:
        raise InstanceError("header must be '|V| |E| |C|'", lineno)
    n, m, c = (_num(t, lineno) for t in tokens)
    if n < 1 or m < 0 or c < 0:
        raise InstanceError("header counts must be non-negative and |V| >= 1", lineno)
    return n, m, c


def _assemble(n, edge_recs, conflict_recs, name, shift_vertices, shift_edges):
    """Validate records ``(lineno, u, v, w)`` / ``(lineno, tokens)`` into an Instance."""
    edges = []
    weights = []
    index_of = {}
    for lineno, u, v, w in edge_recs:
        u -= shift_vertices
        v -= shift_vertices
        if u == v:
            raise InstanceError("self-loop", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise InstanceError(f"vertex out of range 0..{n - 1}", lineno)
        key = (min(u, v), max(u, v))
        if key in index_of:
            raise InstanceError(f"duplicate edge {key}", lineno)
        index_of[key] = len(edges)
        edges.append((u, v))
        weights.append(w)
    m = len(edges)
    pairs = set()
    for lineno, toks in conflict_recs:
        if len(toks) == 2:
            i, j = (t - shift_edges for t in toks)
        else:
            u1, v1, u2, v2 = (t - shift_vertices for t in toks)
            try:
                i = index_of[(min(u1, v1), max(u1, v1))]
                j = index_of[(min(u2, v2), max(u2, v2))]
            except KeyError:
                raise InstanceError("conflict names an edge not in the edge list", lineno) from None
        if i == j:
            raise InstanceError("conflict references identical edges", lineno)
        if not (0 <= i < m and 0 <= j < m):
            raise InstanceError(f"conflict edge index out of range 0..{m - 1}", lineno)
        pair = frozenset((i, j))
        if pair in pairs:
            raise InstanceError(f"duplicate conflict {sorted(pair)}", lineno)
        pairs.add(pair)
    graph = Graph(n, tuple(edges), tuple(weights))
    if not graph.is_connected():
        raise InstanceError("graph is disconnected; no spanning tree exists")
    return Instance(graph, frozenset(pairs), name)


def _parse_canonical(text, name):
    lines = list(_lines(text))
    if not lines:
        raise InstanceError("empty input", 1)
    lineno, toks = lines[0]
    n, m, c = _header(toks, lineno)
    if len(lines) - 1 != m + c:
        last = lines[-1][0]
        raise InstanceError(f"expected {m} edge and {c} conflict lines, found {len(lines) - 1}", last)
    edge_recs = []
    for lineno, toks in lines[1 : 1 + m]:
        if len(toks) != 3:
            raise InstanceError("edge line must be 'u v w'", lineno)
        edge_recs.append((lineno, _num(toks[0], lineno), _num(toks[1], lineno), _num(toks[2], lineno, float)))
    conflict_recs = []
    for lineno, toks in lines[1 + m :]:
        if len(toks) != 2:
            raise InstanceError("conflict line must be 'i j'", lineno)
        conflict_recs.append((lineno, [_num(t, lineno) for t in toks]))
    return _assemble(n, edge_recs, conflict_recs, name, 0, 0)


def _detect_shifts(n, m, edge_recs, conflict_recs):
    verts = [x for _, u, v, _ in edge_recs for x in (u, v)]
    tuples = [t for _, toks in conflict_recs if len(toks) == 4 for t in toks]
    pairs = [t for _, toks in conflict_recs if len(toks) == 2 for t in toks]
    all_v = verts + tuples
    shift_v = 1 if all_v and (n in all_v and 0 not in all_v) else 0
    if pairs and m in pairs and 0 not in pairs:
        shift_e = 1
    elif pairs and 0 in pairs:
        shift_e = 0
    else:
        shift_e = shift_v
    return shift_v, shift_e


def _parse_lines_adapter(text, name):
    lines = list(_lines(text))
    if not lines:
        raise InstanceError("empty input", 1)
    lineno, toks = lines[0]
    n, m, c = _header(toks, lineno)
    body = lines[1:]
    if len(body) < m + c:
        raise InstanceError(f"expected {m} edges and {c} conflicts, found {len(body)} records", body[-1][0] if body else lineno)
    edge_recs = []
    for lineno, toks in body[:m]:
        if len(toks) == 4:  # leading edge id
            toks = toks[1:]
        if len(toks) != 3:
            raise InstanceError("edge line must be 'u v w'", lineno)
        edge_recs.append((lineno, _num(toks[0], lineno), _num(toks[1], lineno), _num(toks[2], lineno, float)))
    conflict_recs = []
    for lineno, toks in body[m : m + c]:
        if len(toks) not in (2, 4):
            raise InstanceError("conflict line must hold 2 edge indices or 4 vertices", lineno)
        conflict_recs.append((lineno, [_num(t, lineno) for t in toks]))
    if len(body) > m + c:
        raise InstanceError("trailing records after the declared conflicts", body[m + c][0])
    sv, se = _detect_shifts(n, m, edge_recs, conflict_recs)
    return _assemble(n, edge_recs, conflict_recs, name, sv, se)


def _parse_token_adapter(text, name):
    toks = [(lineno, t) for lineno, line in _lines(text) for t in line]
    if len(toks) < 3:
        raise InstanceError("truncated header", toks[-1][0] if toks else 1)
    n, m, c = (_num(t, ln) for ln, t in toks[:3])
    rest = toks[3:]
    if len(rest) < 3 * m:
        raise InstanceError("truncated edge list", rest[-1][0] if rest else toks[2][0])
    edge_recs = []
    for i in range(m):
        (ln, a), (_, b), (_, w) = rest[3 * i : 3 * i + 3]
        edge_recs.append((ln, _num(a, ln), _num(b, ln), _num(w, ln, float)))
    tail = rest[3 * m :]
    if c and len(tail) == 2 * c:
        width = 2
    elif c and len(tail) == 4 * c:
        width = 4
    elif c == 0 and not tail:
        width = 2
    else:
        raise InstanceError(f"{len(tail)} tokens cannot encode {c} conflicts", tail[-1][0] if tail else rest[-1][0])
    conflict_recs = []
    for i in range(c):
        chunk = tail[width * i : width * (i + 1)]
        conflict_recs.append((chunk[0][0], [_num(t, ln) for ln, t in chunk]))
    sv, se = _detect_shifts(n, m, edge_recs, conflict_recs)
    return _assemble(n, edge_recs, conflict_recs, name, sv, se)


def detect_format(text) -> str:
    """Classify ``text``: ``canonical`` when it parses strictly as such (every
    file written by :func:`write_instance` does), else ``zhang`` when it is
    line structured, else ``carrabs``."""
    try:
        _parse_canonical(text, "probe")
        return "canonical"
    except InstanceError:
        pass
    try:
        _parse_lines_adapter(text, "probe")
        return "zhang"
    except InstanceError:
        return "carrabs"


def parse_instance(text, format: str = "auto", name: str = "instance") -> Instance:
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; choose from {FORMATS}")
    if format == "auto":
        format = detect_format(text)
    if format == "canonical":
        return _parse_canonical(text, name)
    if format == "zhang":
        return _parse_lines_adapter(text, name)
    return _parse_token_adapter(text, name)


def read_instance(path, format: str = "auto") -> Instance:
    path = Path(path)
    return parse_instance(path.read_bytes(), format, name=path.stem)


def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def write_instance(instance: Instance) -> str:
    g = instance.graph
    out = [f"{g.vertex_count} {g.edge_count} {len(instance.conflicts)}"]
    out += [f"{u} {v} {_fmt_weight(w)}" for (u, v), w in zip(g.edges, g.weights)]
    out += [f"{i} {j}" for i, j in instance.conflict_pairs]
    return "\n".join(out) + "\n"

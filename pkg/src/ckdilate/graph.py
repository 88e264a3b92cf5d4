"""Finite colored directed graphs, path bases and backward-tail bases.

Paths are written right to left: ``lam = e_n ... e_1`` means ``e_1`` is
traversed first, so ``edges[0]`` is the last edge and ``edges[-1]`` the
first.  ``r(lam) = r(edges[0])`` and ``s(lam) = s(edges[-1])``.

Edge and vertex order is the declaration order of the graph; every
"smallest edge" choice and every basis ordering uses it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

__all__ = [
    "Edge",
    "Graph",
    "GraphError",
    "Path",
    "PathBasis",
    "Tail",
    "TailSelection",
    "Symbol",
    "BackwardBasis",
    "receivers",
    "enumerate_paths",
    "select_tails",
    "enumerate_backward_basis",
    "count_backward_basis",
    "count_paths",
]


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    rng: str
    color: str = "0"


class Graph:
    """A finite directed multigraph with an edge coloring."""

    def __init__(self, vertices: Iterable[str], edges: Iterable[Edge | tuple]):
        self.vertices: tuple[str, ...] = tuple(str(v) for v in vertices)
        es = []
        for e in edges:
            if not isinstance(e, Edge):
                e = Edge(*[str(x) for x in e])
            es.append(e)
        self.edges: tuple[Edge, ...] = tuple(es)

        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex id")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate edge id")
        vs = set(self.vertices)
        for e in self.edges:
            if e.src not in vs or e.rng not in vs:
                raise GraphError(f"edge {e.id!r} references an undeclared vertex")
            if e.color is None:
                raise GraphError(f"edge {e.id!r} has no color")

        self._edge = {e.id: e for e in self.edges}
        self._vindex = {v: k for k, v in enumerate(self.vertices)}
        self._eindex = {e.id: k for k, e in enumerate(self.edges)}

    # -- lookup -------------------------------------------------------------

    def edge(self, eid: str) -> Edge:
        try:
            return self._edge[eid]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}") from None

    def has_edge(self, eid: str) -> bool:
        return eid in self._edge

    def has_vertex(self, v: str) -> bool:
        return v in self._vindex

    def vertex_index(self, v: str) -> int:
        return self._vindex[v]

    def edge_index(self, eid: str) -> int:
        return self._eindex[eid]

    def src(self, eid: str) -> str:
        return self.edge(eid).src

    def rng(self, eid: str) -> str:
        return self.edge(eid).rng

    def color(self, eid: str) -> str:
        return self.edge(eid).color

    @cached_property
    def colors(self) -> tuple[str, ...]:
        return tuple(sorted({e.color for e in self.edges}))

    def in_edges(self, v: str) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges if e.rng == v)

    def out_edges(self, v: str) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges if e.src == v)

    def color_subgraph(self, color: str) -> "Graph":
        return Graph(self.vertices, [e for e in self.edges if e.color == color])

    # -- paths --------------------------------------------------------------

    def vertex_path(self, v: str) -> "Path":
        if v not in self._vindex:
            raise GraphError(f"unknown vertex {v!r}")
        return Path((), v, v)

    def path(self, edges: Sequence[str]) -> "Path":
        edges = tuple(edges)
        if not edges:
            raise GraphError("use vertex_path for length-0 paths")
        for k in range(len(edges) - 1):
            if self.src(edges[k]) != self.rng(edges[k + 1]):
                raise GraphError(f"edges {edges[k]!r}, {edges[k + 1]!r} do not chain")
        return Path(edges, self.src(edges[-1]), self.rng(edges[0]))

    def compose(self, lam: "Path", mu: "Path") -> "Path":
        """The path ``lam mu`` (``mu`` first); requires ``s(lam) == r(mu)``."""
        if lam.src != mu.rng:
            raise GraphError("paths do not compose")
        if not lam.edges:
            return mu
        if not mu.edges:
            return lam
        return Path(lam.edges + mu.edges, mu.src, lam.rng)

    def path_key(self, p: "Path") -> tuple:
        if not p.edges:
            return (0, (self._vindex[p.src],))
        return (len(p.edges), tuple(self._eindex[e] for e in p.edges))

    # -- equality / serialization -----------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.vertices == other.vertices
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.vertices, self.edges))

    def __repr__(self):
        return f"Graph(vertices={list(self.vertices)}, edges={len(self.edges)})"

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [
                {"id": e.id, "src": e.src, "dst": e.rng, "color": e.color}
                for e in self.edges
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Graph":
        try:
            vertices = doc["vertices"]
            edges = [
                Edge(str(e["id"]), str(e["src"]), str(e["dst"]), str(e.get("color", "0")))
                for e in doc["edges"]
            ]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph document: missing {exc}") from None
        return cls(vertices, edges)


@dataclass(frozen=True)
class Path:
    edges: tuple[str, ...]
    src: str
    rng: str

    def __post_init__(self):
        if not self.edges and self.src != self.rng:
            raise GraphError("a length-0 path must start and end at its vertex")

    def __len__(self):
        return len(self.edges)

    def label(self) -> str:
        return ".".join(self.edges) if self.edges else self.src


def receivers(g: Graph) -> frozenset[str]:
    return frozenset(e.rng for e in g.edges)


@dataclass(frozen=True)
class PathBasis:
    graph: Graph
    depth: int
    paths: tuple[Path, ...]
    index: dict = field(repr=False, compare=False)

    def __len__(self):
        return len(self.paths)

    def labels(self) -> list[str]:
        return [p.label() for p in self.paths]


def _paths_by_length(g: Graph, depth: int) -> list[list[Path]]:
    layers = [[g.vertex_path(v) for v in g.vertices]]
    for _ in range(depth):
        nxt = []
        for lam in layers[-1]:
            for e in g.edges:
                if e.src == lam.rng:
                    nxt.append(Path((e.id,) + lam.edges, lam.src, e.rng))
        layers.append(nxt)
    return layers


def enumerate_paths(g: Graph, depth: int, source: str | None = None) -> PathBasis:
    """All paths of length at most ``depth``, length-major then lexicographic.

    With ``source`` given, only paths with that source vertex are kept.
    """
    if depth < 0:
        raise GraphError("depth must be non-negative")
    if source is not None and not g.has_vertex(source):
        raise GraphError(f"unknown vertex {source!r}")
    paths = []
    for layer in _paths_by_length(g, depth):
        if source is not None:
            layer = [p for p in layer if p.src == source]
        paths.extend(sorted(layer, key=g.path_key))
    return PathBasis(g, depth, tuple(paths), {p: k for k, p in enumerate(paths)})


@dataclass(frozen=True)
class Tail:
    """A backward path into a vertex: ``prefix`` then ``cycle`` repeated forever.

    A finite tail has an empty ``cycle``.  Edges are listed in the order they
    are met walking backwards, i.e. ``e_{v,1}, e_{v,2}, ...``.
    """

    vertex: str
    prefix: tuple[str, ...]
    cycle: tuple[str, ...] = ()

    @property
    def is_finite(self) -> bool:
        return not self.cycle

    @property
    def length(self) -> float:
        return len(self.prefix) if self.is_finite else float("inf")

    def edge(self, i: int) -> str | None:
        """The ``i``-th backward edge (1-based); None past a finite end."""
        if i < 1:
            raise ValueError("tail edges are 1-based")
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        if not self.cycle:
            return None
        return self.cycle[(i - len(self.prefix) - 1) % len(self.cycle)]

    def cap(self, i: int) -> int:
        return i if not self.is_finite else min(i, len(self.prefix))


@dataclass(frozen=True)
class TailSelection:
    tails: dict

    def __getitem__(self, v: str) -> Tail:
        return self.tails[v]

    def anchor(self, g: Graph, v: str, i: int) -> str:
        """Source vertex of the truncation ``mu_{v,i}``."""
        t = self.tails[v]
        i = t.cap(i)
        return v if i == 0 else g.src(t.edge(i))

    def check(self, g: Graph) -> None:
        for v in g.vertices:
            if v not in self.tails:
                raise GraphError(f"no tail for vertex {v!r}")
            t = self.tails[v]
            seq = t.prefix + t.cycle
            at = v
            for e in seq:
                if not g.has_edge(e) or g.rng(e) != at:
                    raise GraphError(f"tail at {v!r} does not chain backwards at {e!r}")
                at = g.src(e)
            if t.cycle:
                start = g.rng(t.cycle[0])
                if at != start:
                    raise GraphError(f"tail cycle at {v!r} is not closed")
            elif g.in_edges(at):
                raise GraphError(f"finite tail at {v!r} does not end at a source")


def select_tails(g: Graph) -> TailSelection:
    """Walk backwards from each vertex along the smallest incoming edge."""
    tails = {}
    for v in g.vertices:
        seen = {v: 0}
        walk: list[str] = []
        at = v
        while True:
            ins = g.in_edges(at)
            if not ins:
                tails[v] = Tail(v, tuple(walk))
                break
            e = ins[0]
            walk.append(e)
            at = g.src(e)
            if at in seen:
                k = seen[at]
                tails[v] = Tail(v, tuple(walk[:k]), tuple(walk[k:]))
                break
            seen[at] = len(walk)
    return TailSelection(tails)


@dataclass(frozen=True)
class Symbol:
    """The reduced symbol ``lam mu_{v,i}^{-1}``."""

    lam: Path
    vertex: str
    index: int

    @property
    def rng(self) -> str:
        return self.lam.rng

    @property
    def gauge_degree(self) -> int:
        """``|lam| - |mu|``: the exponent that makes ``U_z T_e U_z^* = z T_e``."""
        return len(self.lam) - self.index

    def label(self) -> str:
        return f"{self.lam.label()}*mu[{self.vertex},{self.index}]^-1"


def reduce_symbol(g: Graph, t: TailSelection, lam: Path, v: str, i: int) -> Symbol:
    tail = t[v]
    i = tail.cap(i)
    if lam.src != t.anchor(g, v, i):
        raise GraphError("symbol source does not match tail truncation")
    edges = lam.edges
    while i > 0 and edges and edges[-1] == tail.edge(i):
        edges = edges[:-1]
        i -= 1
    if len(edges) == len(lam.edges):
        return Symbol(lam, v, i)
    anchor = t.anchor(g, v, i)
    lam = Path(edges, anchor, g.rng(edges[0])) if edges else Path((), anchor, anchor)
    return Symbol(lam, v, i)


@dataclass(frozen=True)
class BackwardBasis:
    graph: Graph
    tails: TailSelection
    depth: int
    symbols: tuple[Symbol, ...]
    index: dict = field(repr=False, compare=False)

    def __len__(self):
        return len(self.symbols)

    def labels(self) -> list[str]:
        return [s.label() for s in self.symbols]

    def reduce(self, lam: Path, v: str, i: int) -> Symbol:
        return reduce_symbol(self.graph, self.tails, lam, v, i)

    def shift(self, e: str, sym: Symbol) -> Symbol | None:
        """Reduced form of ``e sym``; None when it leaves the truncation."""
        g = self.graph
        if g.src(e) != sym.rng:
            return None
        lam = g.compose(g.path([e]), sym.lam)
        out = self.reduce(lam, sym.vertex, sym.index)
        return out if out in self.index else None


def enumerate_backward_basis(
    g: Graph, t: TailSelection, depth: int, vertices: Sequence[str] | None = None
) -> BackwardBasis:
    """Reduced symbols ``lam mu_{v,i}^{-1}`` with ``|lam| <= depth`` and ``i <= depth``.

    ``vertices`` restricts to the components of the listed tail vertices.
    """
    if depth < 0:
        raise GraphError("depth must be non-negative")
    t.check(g)
    vs = g.vertices if vertices is None else tuple(vertices)
    per_anchor: dict[str, list[Path]] = {}
    for p in enumerate_paths(g, depth).paths:
        per_anchor.setdefault(p.src, []).append(p)
    symbols = []
    for v in vs:
        tail = t[v]
        for i in range(tail.cap(depth) + 1):
            u = t.anchor(g, v, i)
            ei = tail.edge(i) if i else None
            for lam in per_anchor.get(u, []):
                if i and lam.edges and lam.edges[-1] == ei:
                    continue
                symbols.append(Symbol(lam, v, i))
    return BackwardBasis(g, t, depth, tuple(symbols), {s: k for k, s in enumerate(symbols)})


def _forward_counts(g: Graph, depth: int) -> list[list[int]]:
    # counts[k][x]: number of paths of length exactly k with source x
    n = len(g.vertices)
    counts = [[1] * n]
    for _ in range(depth):
        prev = counts[-1]
        nxt = [0] * n
        for e in g.edges:
            nxt[g.vertex_index(e.src)] += prev[g.vertex_index(e.rng)]
        counts.append(nxt)
    return counts


def count_paths(g: Graph, depth: int, source: str) -> int:
    """Number of paths of length at most ``depth`` leaving ``source``."""
    return sum(c[g.vertex_index(source)] for c in _forward_counts(g, depth))


def count_backward_basis(g: Graph, t: TailSelection, depth: int, v: str) -> int:
    """``len(enumerate_backward_basis(g, t, depth, [v]))`` without enumerating."""
    counts = _forward_counts(g, depth)

    def upto(x: str, k: int) -> int:
        return sum(c[g.vertex_index(x)] for c in counts[: k + 1])

    tail = t[v]
    total = 0
    for i in range(tail.cap(depth) + 1):
        total += upto(t.anchor(g, v, i), depth)
        if i:
            total -= upto(g.rng(tail.edge(i)), depth - 1)
    return total

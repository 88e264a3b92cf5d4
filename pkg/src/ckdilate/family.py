"""Concrete operator families and the builders for the canonical representations.

A family carries an ``interior`` projection.  Relations are only asserted
after compressing by it; the directions outside the interior are the
truncation boundary of a finite model of an infinite-dimensional family.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .graph import (
    BackwardBasis,
    Graph,
    GraphError,
    Path,
    TailSelection,
    enumerate_backward_basis,
    enumerate_paths,
    select_tails,
)
from .linalg import block_diag, herm, opnorm

__all__ = [
    "DEFAULT_TOL",
    "FamilyError",
    "NonReducingError",
    "OperatorFamily",
    "build_fock",
    "build_pi_v",
    "build_rho_infty",
    "build_cycle_exact",
    "terminal_cycle_family",
    "gauge_unitary",
    "gauge_action",
    "direct_sum",
    "restrict",
    "inflate",
    "conjugate",
    "reducing_defect",
]

DEFAULT_TOL = 1e-9


class FamilyError(ValueError):
    pass


class NonReducingError(FamilyError):
    def __init__(self, operator: str, defect: float):
        super().__init__(f"subspace is not reducing: {operator} leaks {defect:.3e}")
        self.operator = operator
        self.defect = defect


def _freeze(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    graph: Graph
    P: dict
    S: dict
    interior: np.ndarray
    tol: float = DEFAULT_TOL
    labels: tuple | None = None
    depth: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        g = self.graph
        P = {v: _freeze(self.P[v]) for v in g.vertices if v in self.P}
        S = {e.id: _freeze(self.S[e.id]) for e in g.edges if e.id in self.S}
        if len(P) != len(g.vertices) or set(self.P) - set(P):
            raise FamilyError("P must be given for exactly the graph's vertices")
        if len(S) != len(g.edges) or set(self.S) - set(S):
            raise FamilyError("S must be given for exactly the graph's edges")
        dims = {m.shape for m in list(P.values()) + list(S.values())}
        interior = _freeze(self.interior)
        dims.add(interior.shape)
        if len(dims) != 1:
            raise FamilyError(f"inconsistent matrix shapes {sorted(dims)}")
        (shape,) = dims
        if len(shape) != 2 or shape[0] != shape[1]:
            raise FamilyError("operators must be square")
        if self.labels is not None and len(self.labels) != shape[0]:
            raise FamilyError("labels do not match dimension")
        if not self.tol > 0:
            raise FamilyError("tolerance must be positive")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "interior", interior)

    @property
    def dim(self) -> int:
        return self.interior.shape[0]

    def generators(self) -> list[tuple[str, np.ndarray]]:
        """Named list of every P_v, S_e and S_e^*."""
        out = [(f"p({v})", m) for v, m in self.P.items()]
        for e, m in self.S.items():
            out.append((f"s({e})", m))
            out.append((f"s*({e})", m.conj().T))
        return out

    def path_operator(self, lam: Path) -> np.ndarray:
        if not lam.edges:
            return np.array(self.P[lam.src])
        out = np.array(self.S[lam.edges[0]])
        for e in lam.edges[1:]:
            out = out @ self.S[e]
        return out

    def color_family(self, color: str) -> "OperatorFamily":
        """The TCK family (P, S^{(color)}) on the color-``color`` subgraph."""
        sub = self.graph.color_subgraph(color)
        return replace(self, graph=sub, S={e.id: self.S[e.id] for e in sub.edges})

    def with_tol(self, tol: float) -> "OperatorFamily":
        return replace(self, tol=tol)

    def invariant_defects(self) -> dict:
        """How far the stored matrices are from the family invariants."""
        out = {"projection": 0.0, "orthogonality": 0.0, "support": 0.0, "interior": 0.0}
        vs = list(self.P)
        for k, v in enumerate(vs):
            p = self.P[v]
            out["projection"] = max(out["projection"], opnorm(p @ p - p), opnorm(p - p.conj().T))
            for w in vs[k + 1:]:
                out["orthogonality"] = max(out["orthogonality"], opnorm(p @ self.P[w]))
            out["interior"] = max(out["interior"], opnorm(p @ self.interior - self.interior @ p))
        pi = self.interior
        for e in self.graph.edges:
            s = self.S[e.id]
            diff = self.P[e.rng] @ s @ self.P[e.src] - s
            out["support"] = max(out["support"], opnorm(pi @ diff @ pi))
        return out


# -- builders -------------------------------------------------------------------


def _diag_interior(flags: Iterable[bool]) -> np.ndarray:
    return np.diag(np.array(list(flags), dtype=complex))


def _fock_from_basis(g: Graph, paths: Sequence[Path], index: dict, depth: int, tol: float):
    d = len(paths)
    P = {v: np.zeros((d, d), dtype=complex) for v in g.vertices}
    S = {e.id: np.zeros((d, d), dtype=complex) for e in g.edges}
    for k, lam in enumerate(paths):
        P[lam.rng][k, k] = 1.0
        if len(lam) >= depth:
            continue
        for e in g.edges:
            if e.src == lam.rng:
                tgt = Path((e.id,) + lam.edges, lam.src, e.rng)
                j = index.get(tgt)
                if j is not None:
                    S[e.id][j, k] = 1.0
    interior = _diag_interior(len(lam) <= depth - 1 for lam in paths)
    labels = tuple(p.label() for p in paths)
    return OperatorFamily(g, P, S, interior, tol=tol, labels=labels, depth=depth)


def build_fock(g: Graph, depth: int, tol: float = DEFAULT_TOL) -> OperatorFamily:
    """Left-creation family on paths of length <= depth."""
    if depth < 1:
        raise FamilyError("depth must be at least 1")
    b = enumerate_paths(g, depth)
    return _fock_from_basis(g, b.paths, b.index, depth, tol)


def build_pi_v(g: Graph, v: str, depth: int, tol: float = DEFAULT_TOL) -> OperatorFamily:
    """The Fock family restricted to paths with source ``v``."""
    if depth < 1:
        raise FamilyError("depth must be at least 1")
    if not g.has_vertex(v):
        raise FamilyError(f"unknown vertex {v!r}")
    b = enumerate_paths(g, depth, source=v)
    return _fock_from_basis(g, b.paths, b.index, depth, tol)


def build_rho_infty(
    g: Graph,
    tails: TailSelection | None = None,
    depth: int = 4,
    tol: float = DEFAULT_TOL,
    vertices: Sequence[str] | None = None,
) -> OperatorFamily:
    """Backward-path family on reduced symbols ``lam mu_{v,i}^{-1}``.

    Interior symbols have ``|lam| <= depth - 1`` and ``i <= depth - 1``; on
    them the family is full Cuntz-Krieger.
    """
    if depth < 1:
        raise FamilyError("depth must be at least 1")
    tails = select_tails(g) if tails is None else tails
    try:
        b = enumerate_backward_basis(g, tails, depth, vertices=vertices)
    except GraphError as exc:
        raise FamilyError(f"inconsistent tail selection: {exc}") from None
    return rho_from_basis(b, tol)


def rho_from_basis(b: BackwardBasis, tol: float = DEFAULT_TOL) -> OperatorFamily:
    g = b.graph
    d = len(b)
    P = {v: np.zeros((d, d), dtype=complex) for v in g.vertices}
    S = {e.id: np.zeros((d, d), dtype=complex) for e in g.edges}
    for k, sym in enumerate(b.symbols):
        P[sym.rng][k, k] = 1.0
        for e in g.edges:
            out = b.shift(e.id, sym)
            if out is not None:
                S[e.id][b.index[out], k] = 1.0
    interior = _diag_interior(
        len(s.lam) <= b.depth - 1 and s.index <= b.depth - 1 for s in b.symbols
    )
    labels = tuple(b.labels())
    fam = OperatorFamily(g, P, S, interior, tol=tol, labels=labels, depth=b.depth)
    fam.meta["basis"] = "backward"
    return fam


def terminal_cycle_family(
    g: Graph, cycle_edges: Sequence[str], phases: Sequence[complex] | None = None,
    tol: float = DEFAULT_TOL,
) -> OperatorFamily:
    """Exact full-CK family on a simple cycle that has no exits.

    One basis vector per cycle vertex; every other P_v and S_e vanishes.
    Entries into the cycle are allowed; exits are not, since (I) would fail.
    """
    cyc = list(cycle_edges)
    if not cyc:
        raise FamilyError("empty cycle")
    verts = [g.src(e) for e in cyc]
    if len(set(verts)) != len(verts):
        raise FamilyError("cycle is not simple")
    if {g.rng(e) for e in cyc} != set(verts):
        raise FamilyError("edges do not form a cycle")
    for v in verts:
        outs = g.out_edges(v)
        if len(outs) != 1 or outs[0] not in cyc:
            raise FamilyError(f"cycle vertex {v!r} has an exit")
    phases = [1.0] * len(cyc) if phases is None else list(phases)
    if len(phases) != len(cyc):
        raise FamilyError("one phase per cycle edge required")
    d = len(verts)
    pos = {v: k for k, v in enumerate(verts)}
    P = {v: np.zeros((d, d), dtype=complex) for v in g.vertices}
    S = {e.id: np.zeros((d, d), dtype=complex) for e in g.edges}
    for v, k in pos.items():
        P[v][k, k] = 1.0
    for e, z in zip(cyc, phases):
        S[e][pos[g.rng(e)], pos[g.src(e)]] = z
    return OperatorFamily(g, P, S, np.eye(d, dtype=complex), tol=tol,
                          labels=tuple(verts))


def build_cycle_exact(
    g: Graph, phases: dict | None = None, tol: float = DEFAULT_TOL
) -> OperatorFamily:
    """Exact family for a vertex-disjoint union of cycles: rank-one P_v, unitary shifts."""
    for v in g.vertices:
        if len(g.in_edges(v)) != 1 or len(g.out_edges(v)) != 1:
            raise FamilyError("graph is not a disjoint union of cycles")
    d = len(g.vertices)
    P = {v: np.zeros((d, d), dtype=complex) for v in g.vertices}
    S = {e.id: np.zeros((d, d), dtype=complex) for e in g.edges}
    for k, v in enumerate(g.vertices):
        P[v][k, k] = 1.0
    for e in g.edges:
        z = 1.0 if phases is None else phases.get(e.id, 1.0)
        S[e.id][g.vertex_index(e.rng), g.vertex_index(e.src)] = z
    return OperatorFamily(g, P, S, np.eye(d, dtype=complex), tol=tol,
                          labels=tuple(g.vertices))


def gauge_unitary(b: BackwardBasis, z: complex) -> np.ndarray:
    """Diagonal unitary scaling ``xi_{lam mu^{-1}}`` by ``z^{|lam| - |mu|}``."""
    if abs(abs(z) - 1.0) > 1e-12:
        raise FamilyError("gauge parameter must have modulus one")
    return np.diag([complex(z) ** s.gauge_degree for s in b.symbols])


def gauge_action(b: BackwardBasis, z: complex, a: np.ndarray) -> np.ndarray:
    """``U_z a U_z^*`` entrywise: entry (i, j) picks up ``z^(deg_i - deg_j)``.

    Equal degrees give the factor 1 exactly, so diagonal operators such as
    the P_v are fixed with no rounding at all.
    """
    if abs(abs(z) - 1.0) > 1e-12:
        raise FamilyError("gauge parameter must have modulus one")
    deg = np.array([s.gauge_degree for s in b.symbols])
    diff = deg[:, None] - deg[None, :]
    powers = {int(k): complex(z) ** int(k) for k in np.unique(diff)}
    powers[0] = 1.0
    factor = np.vectorize(powers.__getitem__, otypes=[complex])(diff)
    return factor * np.asarray(a)


# -- combinators -----------------------------------------------------------------


def direct_sum(fams: Sequence[OperatorFamily]) -> OperatorFamily:
    fams = list(fams)
    if not fams:
        raise FamilyError("direct sum of no families")
    g = fams[0].graph
    for f in fams[1:]:
        if f.graph != g:
            raise FamilyError("direct sum of families over different graphs")
    P = {v: block_diag([f.P[v] for f in fams]) for v in g.vertices}
    S = {e.id: block_diag([f.S[e.id] for f in fams]) for e in g.edges}
    interior = block_diag([f.interior for f in fams])
    labels = None
    if all(f.labels is not None for f in fams):
        labels = tuple(f"{k}:{lab}" for k, f in enumerate(fams) for lab in f.labels)
    depths = {f.depth for f in fams}
    return OperatorFamily(g, P, S, interior, tol=max(f.tol for f in fams),
                          labels=labels, depth=depths.pop() if len(depths) == 1 else None)


def inflate(fam: OperatorFamily, m: int) -> OperatorFamily:
    if m < 1:
        raise FamilyError("inflation multiplicity must be positive")
    return direct_sum([fam] * m)


def conjugate(fam: OperatorFamily, u: np.ndarray) -> OperatorFamily:
    """The unitarily equivalent family ``u A u^*``."""
    if u.shape != (fam.dim, fam.dim):
        raise FamilyError(f"unitary has shape {u.shape}, family has dimension {fam.dim}")
    uh = u.conj().T
    return replace(
        fam,
        P={v: u @ m @ uh for v, m in fam.P.items()},
        S={e: u @ m @ uh for e, m in fam.S.items()},
        interior=u @ fam.interior @ uh,
        labels=None,
    )


def reducing_defect(fam: OperatorFamily, cols: np.ndarray) -> tuple[str, float]:
    """Worst leak ``||(I - VV^*) A V||`` over all generators A, with its name."""
    proj_out = np.eye(fam.dim) - cols @ cols.conj().T
    worst = ("none", 0.0)
    for name, a in fam.generators():
        d = opnorm(proj_out @ a @ cols)
        if d > worst[1]:
            worst = (name, d)
    return worst


def restrict(fam: OperatorFamily, cols: np.ndarray, tol: float | None = None) -> OperatorFamily:
    """Compress ``fam`` to a reducing subspace given by orthonormal columns."""
    cols = np.asarray(cols, dtype=complex)
    if cols.ndim != 2 or cols.shape[0] != fam.dim:
        raise FamilyError("subspace has the wrong number of rows")
    k = cols.shape[1]
    if opnorm(cols.conj().T @ cols - np.eye(k)) > 1e-10:
        raise FamilyError("subspace columns are not orthonormal")
    tol = fam.tol if tol is None else tol
    name, d = reducing_defect(fam, cols)
    if d > tol:
        raise NonReducingError(name, d)
    ch = cols.conj().T
    pi = herm(ch @ fam.interior @ cols)
    w, v = np.linalg.eigh(pi)
    # a non-commuting interior is rounded to its spectral projection
    pi = (v[:, w > 0.5] @ v[:, w > 0.5].conj().T) if k else pi
    return OperatorFamily(
        fam.graph,
        {v_: ch @ m @ cols for v_, m in fam.P.items()},
        {e: ch @ m @ cols for e, m in fam.S.items()},
        pi,
        tol=fam.tol,
        depth=fam.depth,
    )

"""Dilations of TCK families to full Cuntz-Krieger families, with certificates.

Every construction here keeps the original space H invariant under the
dilated edge operators (block upper-triangular form), so compressing any
polynomial in the p_v, s_e back to H returns the original polynomial.
The certificate recomputes that from the matrices rather than trusting it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .family import (
    FamilyError,
    OperatorFamily,
    build_fock,
    build_rho_infty,
    direct_sum,
    inflate,
)
from .graph import Symbol, count_backward_basis, enumerate_backward_basis, enumerate_paths, receivers, select_tails
from .linalg import opnorm, random_unitary, rank_threshold
from .verify import check_tck, defect_matrix
from .wold import wold_decompose

__all__ = [
    "DilationError",
    "DilationCertificate",
    "compression_certificate",
    "corner_norms",
    "required_inflation",
    "one_step_dilation",
    "full_ck_dilation",
    "colored_full_ck_dilation",
    "random_tck_dilation",
]


class DilationError(FamilyError):
    pass


@dataclass
class DilationCertificate:
    embedding: np.ndarray
    max_degree: int
    compression_error: float
    defects: dict
    depth: int | None
    tol: float
    complete: bool = True
    notes: dict = field(default_factory=dict)

    @property
    def max_defect(self) -> float:
        return max((x for per in self.defects.values() for x in per.values()), default=0.0)

    def holds(self, bound: float | None = None) -> bool:
        bound = self.tol if bound is None else bound
        return self.compression_error <= bound and self.max_defect <= bound

    def to_dict(self) -> dict:
        emb = [[[float(x.real), float(x.imag)] for x in row] for row in self.embedding]
        return {
            "embedding": emb,
            "max_degree": self.max_degree,
            "compression_error": self.compression_error,
            "defects": {c: dict(sorted(d.items())) for c, d in sorted(self.defects.items())},
            "depth": self.depth,
            "tolerance": self.tol,
            "complete": self.complete,
            "notes": dict(sorted(self.notes.items())),
        }


def _monomials(g, max_degree: int):
    """Nonzero words in p_v and s_e: vertices and all paths up to ``max_degree``."""
    return enumerate_paths(g, max_degree).paths


def compression_certificate(
    original: OperatorFamily,
    dilated: OperatorFamily,
    embedding: np.ndarray,
    max_degree: int,
) -> DilationCertificate:
    """Max over monomials f of ``||V^* f(dilated) V - f(original)||``."""
    v = np.asarray(embedding, dtype=complex)
    if v.shape != (dilated.dim, original.dim):
        raise DilationError(
            f"embedding has shape {v.shape}, expected {(dilated.dim, original.dim)}"
        )
    if original.graph != dilated.graph:
        raise DilationError("families are over different graphs")
    if opnorm(v.conj().T @ v - np.eye(original.dim)) > 1e-10:
        raise DilationError("embedding columns are not orthonormal")
    vh = v.conj().T
    err = 0.0
    # apply right to left so each step is a (dim x dim) by (dim x k) product
    for lam in _monomials(original.graph, max_degree):
        x = dilated.P[lam.src] @ v
        for e in reversed(lam.edges):
            x = dilated.S[e] @ x
        err = max(err, opnorm(vh @ x - original.path_operator(lam)))
    rep = check_tck(dilated)
    defects = {c: {u: d["norm"] for u, d in per.items()} for c, per in rep.defects.items()}
    return DilationCertificate(v, max_degree, err, defects, dilated.depth, dilated.tol,
                               notes={"classification": rep.classification})


def corner_norms(dilated: OperatorFamily, embedding: np.ndarray) -> dict:
    """Per edge, the off-diagonal corners of S_e relative to the embedded space."""
    v = embedding
    out_proj = np.eye(dilated.dim) - v @ v.conj().T
    return {
        e: (opnorm(v.conj().T @ s @ out_proj), opnorm(out_proj @ s @ v))
        for e, s in dilated.S.items()
    }


def _defect_basis(fam: OperatorFamily, v: str, color: str | None = None):
    d = defect_matrix(fam, v, color)
    w, vec = np.linalg.eigh(d)
    cut = rank_threshold(fam.dim, max(float(np.max(np.abs(w))), 1.0), fam.tol)
    keep = np.where(w > cut)[0][::-1]
    return w[keep], vec[:, keep]


def _fock_block_sizes(g, v: str, depth: int) -> dict:
    paths = enumerate_paths(g, depth).paths
    return {e: sum(1 for p in paths if p.rng == g.src(e)) for e in g.in_edges(v)}


def required_inflation(fam: OperatorFamily, v: str, depth: int) -> int:
    """Smallest m for which the m-fold defect at v holds every Fock block W_e needs."""
    alpha = len(_defect_basis(fam, v)[0])
    if alpha == 0:
        raise DilationError(f"vertex {v!r} is not singular")
    need = sum(_fock_block_sizes(fam.graph, v, depth).values())
    return max(1, -(-need // alpha))


def one_step_dilation(fam: OperatorFamily, v: str, m: int, depth: int):
    """Non-trivial TCK dilation of the m-fold inflation at a singular vertex v.

    The new space is ``H^(m) (+) H_G`` (truncated Fock space).  Edges into v
    get a corner W_e mapping the Fock block ``P_{s(e)} H_G`` isometrically
    into the defect at v; all other edges act diagonally.
    """
    if depth < 1:
        raise DilationError("depth must be at least 1")
    g = fam.graph
    if len(g.colors) > 1:
        raise DilationError("one-step dilation acts on a single-color family")
    if not g.has_vertex(v):
        raise DilationError(f"unknown vertex {v!r}")
    vals, _ = _defect_basis(fam, v)
    if len(vals) == 0:
        raise DilationError(f"vertex {v!r} is not singular; full-CK families admit no such dilation")
    infl = inflate(fam, m)
    _, zs = _defect_basis(infl, v)
    sizes = _fock_block_sizes(g, v, depth)
    need = sum(sizes.values())
    if zs.shape[1] < need:
        raise DilationError(
            f"inflation {m} gives defect rank {zs.shape[1]} at {v!r}, need {need}; "
            f"use m >= {required_inflation(fam, v, depth)}"
        )
    fock = build_fock(g, depth, tol=fam.tol)
    n, nf = infl.dim, fock.dim
    fpaths = enumerate_paths(g, depth).paths
    W = {}
    col = 0
    for e in g.in_edges(v):
        w = np.zeros((n, nf), dtype=complex)
        for k, p in enumerate(fpaths):
            if p.rng == g.src(e):
                w[:, k] = zs[:, col]
                col += 1
        W[e] = w

    P, S = {}, {}
    for u in g.vertices:
        P[u] = _blocks(infl.P[u], None, fock.P[u])
    for e in g.edges:
        if e.rng == v:
            S[e.id] = _blocks(infl.S[e.id], W[e.id], np.zeros((nf, nf)))
        else:
            S[e.id] = _blocks(infl.S[e.id], None, fock.S[e.id])
    interior = _blocks(infl.interior, None, fock.interior)
    dil = OperatorFamily(g, P, S, interior, tol=fam.tol, depth=depth)
    emb = np.vstack([np.eye(n), np.zeros((nf, n))]).astype(complex)
    cert = compression_certificate(infl, dil, emb, max(depth - 1, 1))
    before = np.linalg.matrix_rank(defect_matrix(infl, v), tol=fam.tol)
    after = np.linalg.matrix_rank(emb.conj().T @ defect_matrix(dil, v) @ emb, tol=fam.tol)
    cert.notes.update({
        "vertex": v,
        "inflation": m,
        "embedded_defect_rank_before": int(before),
        "embedded_defect_rank_after": int(after),
        "max_corner": max(u for u, _ in corner_norms(dil, emb).values()),
    })
    return dil, cert


def _blocks(a, b, d):
    n, k = a.shape[0], d.shape[0]
    out = np.zeros((n + k, n + k), dtype=complex)
    out[:n, :n] = a
    out[n:, n:] = d
    if b is not None:
        out[:n, n:] = b
    return out


def full_ck_dilation(fam: OperatorFamily, depth: int, tails=None, max_dim: int = 4000):
    """Wold-decompose, then swap each pi_v copy for the backward-path family.

    The full-CK complement is kept as is.  Copy (v, i) of pi_v sits inside
    the vertex-v component of the backward-path family as the symbols
    ``lam mu_{v,0}^{-1}``; that subspace is invariant, so compression of
    polynomials is exact.
    """
    g = fam.graph
    if len(g.colors) > 1:
        raise DilationError("use colored_full_ck_dilation for colored families")
    w = wold_decompose(fam)
    if not w.subspaces:
        emb = np.eye(fam.dim, dtype=complex)
        cert = compression_certificate(fam, fam, emb, max(depth // 2, 1))
        return fam, cert
    if not w.diagnostics["complete_blocks"]:
        raise DilationError("Wold blocks are not complete copies of pi_v")
    tails = select_tails(g) if tails is None else tails
    keys = sorted(w.subspaces, key=lambda k: (g.vertex_index(k[0]), k[1]))
    size = w.complement.shape[1] + sum(
        count_backward_basis(g, tails, max(depth, w.depths[k]), k[0]) for k in keys
    )
    if size > max_dim:
        raise DilationError(f"dilation would have dimension {size} > {max_dim}; lower the depth")

    parts, rows = [], []
    if w.complement_family is not None:
        parts.append(w.complement_family)
        rows.append(w.complement.conj().T)
    for key in keys:
        v, _ = key
        n = max(depth, w.depths[key])
        rho = build_rho_infty(g, tails, n, tol=fam.tol, vertices=[v])
        b = enumerate_backward_basis(g, tails, n, vertices=[v])
        j = np.zeros((rho.dim, len(w.paths[key])), dtype=complex)
        for k, lam in enumerate(w.paths[key]):
            j[b.index[Symbol(lam, v, 0)], k] = 1.0
        parts.append(rho)
        rows.append(j @ w.subspaces[key].conj().T)
    dil = direct_sum(parts) if len(parts) > 1 else parts[0]
    emb = np.vstack(rows)
    cert = compression_certificate(fam, dil, emb, max(depth // 2, 1))
    cert.notes["multiplicities"] = dict(w.multiplicities)
    return dil, cert


def colored_full_ck_dilation(fam: OperatorFamily, depth: int, color_order=None,
                             max_dim: int = 20000):
    """Joint full-CK dilation of a colored TCK family.

    New basis vectors are grown breadth-first from the defect vectors of H.
    A defect vector zeta of color c at v receives a backward preimage along
    the smallest color-c edge into v.  Every new vector then gets a forward
    image under each edge leaving its vertex and, for each color whose
    receivers include its vertex and which does not already reach it, one
    backward preimage.  Vectors created at generation ``depth`` are the
    boundary; everything earlier is interior and satisfies (I) and every
    color's full-CK relation there exactly.  Hitting ``max_dim`` leaves the
    result partial, and the certificate says so.
    """
    if depth < 1:
        raise DilationError("depth must be at least 1")
    g = fam.graph
    colors = list(color_order) if color_order is not None else list(g.colors)
    if sorted(colors) != sorted(g.colors):
        raise DilationError("color order must list every color once")
    rep = check_tck(fam)
    if rep.classification == "INVALID":
        raise DilationError("family is not TCK for every color")

    first_in = {}
    for c in colors:
        for v in g.vertices:
            ins = [e.id for e in g.edges if e.rng == v and e.color == c]
            if ins:
                first_in[(c, v)] = ins[0]

    n = fam.dim
    nodes: list[tuple[str, int]] = []           # (vertex, generation)
    into_h: list[tuple[str, int, np.ndarray]] = []  # (edge, node, target vector in H)
    links: dict[tuple[str, int], int] = {}      # (edge, source node) -> target node
    covered: set[tuple[int, str]] = set()

    for c in colors:
        for v in g.vertices:
            if (c, v) not in first_in:
                continue
            vals, zs = _defect_basis(fam, v, c)
            e = first_in[(c, v)]
            for lam, z in zip(vals, zs.T):
                nodes.append((g.src(e), 1))
                into_h.append((e, len(nodes) - 1, np.sqrt(max(lam, 0.0)) * z))

    assigned = {(e, k) for e, k, _ in into_h}
    interior_nodes = set()
    partial = False
    k = 0
    while k < len(nodes):
        u, gen = nodes[k]
        if gen >= depth:
            k += 1
            continue
        fwd = [e.id for e in g.edges if e.src == u and (e.id, k) not in assigned]
        back = [c for c in colors if (c, u) in first_in and (k, c) not in covered]
        if len(nodes) + len(fwd) + len(back) > max_dim:
            partial = True
            k += 1
            continue
        for e in fwd:
            nodes.append((g.rng(e), gen + 1))
            links[(e, k)] = len(nodes) - 1
            assigned.add((e, k))
            covered.add((len(nodes) - 1, g.color(e)))
        for c in back:
            e = first_in[(c, u)]
            nodes.append((g.src(e), gen + 1))
            links[(e, len(nodes) - 1)] = k
            assigned.add((e, len(nodes) - 1))
            covered.add((k, c))
        interior_nodes.add(k)
        k += 1

    m = len(nodes)
    dim = n + m
    P = {}
    for v in g.vertices:
        p = np.zeros((dim, dim), dtype=complex)
        p[:n, :n] = fam.P[v]
        for idx, (u, _) in enumerate(nodes):
            if u == v:
                p[n + idx, n + idx] = 1.0
        P[v] = p
    S = {}
    for e in g.edges:
        s = np.zeros((dim, dim), dtype=complex)
        s[:n, :n] = fam.S[e.id]
        S[e.id] = s
    for e, src, z in into_h:
        S[e][:n, n + src] = z
    for (e, src), tgt in links.items():
        S[e][n + tgt, n + src] = 1.0
    interior = np.zeros((dim, dim), dtype=complex)
    interior[:n, :n] = fam.interior
    for idx in interior_nodes:
        interior[n + idx, n + idx] = 1.0
    dil = OperatorFamily(g, P, S, interior, tol=fam.tol, depth=depth)
    emb = np.vstack([np.eye(n), np.zeros((m, n))]).astype(complex)
    cert = compression_certificate(fam, dil, emb, max(depth // 2, 1))
    cert.complete = not partial
    cert.notes.update({"added_dimension": m, "color_order": colors})
    return dil, cert


def random_tck_dilation(fam: OperatorFamily, rng: np.random.Generator, depth: int = 2):
    """A random TCK dilation ``H (+) H_G`` of a single-color family.

    Edges into a vertex with nonzero defect get a corner ``c W_e`` with W_e a
    random partial isometry into the defect range and c random in [0.2, 1];
    the Fock part is damped by ``(P - c^2 W_e^* W_e)^{1/2}`` to keep (I).
    Everything else acts diagonally.  Returns (dilated family, embedding).
    """
    g = fam.graph
    fock = build_fock(g, depth, tol=fam.tol)
    n, nf = fam.dim, fock.dim
    P = {u: _blocks(fam.P[u], None, fock.P[u]) for u in g.vertices}
    S = {}
    for v in g.vertices:
        ins = g.in_edges(v)
        if not ins:
            continue
        _, zs = _defect_basis(fam, v) if v in receivers(g) else (None, np.zeros((n, 0)))
        if zs.shape[1]:
            zs = zs @ _haar(zs.shape[1], rng)
        free = 0
        for e in ins:
            w = np.zeros((n, nf), dtype=complex)
            cols = [k for k in range(nf) if fock.P[g.src(e)][k, k].real > 0.5]
            take = min(len(cols), zs.shape[1] - free)
            if take > 0:
                sub = cols[:]
                rng.shuffle(sub)
                for j in range(take):
                    w[:, sub[j]] = zs[:, free + j]
                free += take
            c = rng.uniform(0.2, 1.0) if take > 0 else 0.0
            damp = fock.P[g.src(e)] - c ** 2 * (w.conj().T @ w)
            ev, evec = np.linalg.eigh((damp + damp.conj().T) / 2)
            root = (evec * np.sqrt(np.clip(ev, 0, None))) @ evec.conj().T
            S[e] = _blocks(fam.S[e], c * w if take > 0 else None, fock.S[e] @ root)
    interior = _blocks(fam.interior, None, fock.interior)
    dil = OperatorFamily(g, P, S, interior, tol=fam.tol, depth=depth)
    emb = np.vstack([np.eye(n), np.zeros((nf, n))]).astype(complex)
    return dil, emb


def _haar(k: int, rng) -> np.ndarray:
    return random_unitary(k, rng)

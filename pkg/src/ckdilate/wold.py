"""Wold decomposition of Toeplitz-Cuntz-Krieger families.

For each received vertex v the wandering space is the range of the interior
defect ``Q_v - sum T_e T_e^*``.  Each unit wandering vector zeta generates
``span{T_lam zeta : s(lam) = v}``, a copy of the Fock component pi_v; the
orthocomplement of all these copies carries the full-CK part.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .family import (
    FamilyError,
    OperatorFamily,
    build_pi_v,
    direct_sum,
    restrict,
)
from .graph import Path, enumerate_paths, receivers
from .linalg import complement, opnorm, orthonormal_columns, rank_threshold
from .verify import check_tck, defect_matrix

__all__ = [
    "WoldError",
    "WoldDecomposition",
    "wold_decompose",
    "reconstruct",
    "equivalence_isometry",
    "intertwining_defect",
    "full_ck_part",
    "joint_closure",
    "max_full_ck_subspace",
    "interior_trivial",
]

# a generated vector shorter than this is treated as killed by the truncation
_VANISH = 0.5


class WoldError(FamilyError):
    pass


@dataclass
class WoldDecomposition:
    dim: int
    multiplicities: dict
    wandering: dict
    subspaces: dict
    paths: dict
    depths: dict
    complement: np.ndarray
    complement_family: OperatorFamily | None
    diagnostics: dict = field(default_factory=dict)

    @property
    def intertwiners(self) -> dict:
        """``U_{v,i}``: maps ``T_lam zeta`` to the basis vector of ``lam`` in pi_v."""
        return {k: c.conj().T for k, c in self.subspaces.items()}

    def to_dict(self) -> dict:
        def mat(a):
            return [[[float(x.real), float(x.imag)] for x in row] for row in np.atleast_2d(a)]

        keys = sorted(self.subspaces, key=lambda k: (str(k[0]), k[1]))
        return {
            "dimension": self.dim,
            "multiplicities": dict(sorted(self.multiplicities.items())),
            "blocks": [
                {
                    "vertex": v,
                    "index": i,
                    "depth": self.depths[(v, i)],
                    "paths": [p.label() for p in self.paths[(v, i)]],
                    "wandering": mat(self.wandering[(v, i)][None, :])[0],
                    "subspace": mat(self.subspaces[(v, i)]),
                }
                for v, i in keys
            ],
            "complement": mat(self.complement) if self.complement.size else [],
            "complement_dimension": int(self.complement.shape[1]),
            "diagnostics": dict(sorted(self.diagnostics.items())),
        }


def _generate(fam: OperatorFamily, v: str, zeta: np.ndarray, max_len: int):
    """All nonvanishing ``T_lam zeta`` with ``s(lam) = v``, in basis order."""
    g = fam.graph
    layer = [(g.vertex_path(v), zeta)]
    kept = list(layer)
    leak = 0.0
    norm_err = 0.0
    for _ in range(max_len):
        nxt = []
        for lam, x in layer:
            for e in g.edges:
                if e.src != lam.rng:
                    continue
                y = fam.S[e.id] @ x
                n = float(np.linalg.norm(y))
                if n < _VANISH:
                    leak = max(leak, n)
                    continue
                norm_err = max(norm_err, abs(n - 1.0))
                nxt.append((Path((e.id,) + lam.edges, lam.src, e.rng), y))
        if not nxt:
            break
        kept.extend(nxt)
        layer = nxt
    kept.sort(key=lambda px: g.path_key(px[0]))
    return kept, leak, norm_err


def wold_decompose(fam: OperatorFamily, tol: float | None = None) -> WoldDecomposition:
    """Split a TCK family into copies of pi_v plus a full-CK complement."""
    tol = fam.tol if tol is None else tol
    g = fam.graph
    if len(g.colors) > 1:
        raise WoldError("Wold decomposition needs a single-color family; use color_family")
    report = check_tck(fam, tol)
    if report.classification == "INVALID":
        raise WoldError("family does not satisfy the Toeplitz-Cuntz-Krieger relations")
    if report.ambiguous:
        raise WoldError(f"defect rank ambiguous at tolerance for {report.ambiguous}")

    alpha, wandering, subspaces, paths, depths = {}, {}, {}, {}, {}
    leak = norm_err = eig_err = 0.0
    for v in sorted(receivers(g), key=g.vertex_index):
        d = defect_matrix(fam, v)
        w, vec = np.linalg.eigh(d)
        cut = rank_threshold(fam.dim, max(float(np.max(np.abs(w))), 1.0), tol)
        picked = np.where(w > cut)[0][::-1]
        alpha[v] = len(picked)
        for i, k in enumerate(picked):
            eig_err = max(eig_err, abs(w[k] - 1.0))
            zeta = vec[:, k]
            kept, lk, ne = _generate(fam, v, zeta, fam.dim)
            leak, norm_err = max(leak, lk), max(norm_err, ne)
            wandering[(v, i)] = zeta
            subspaces[(v, i)] = np.column_stack([x for _, x in kept])
            paths[(v, i)] = [p for p, _ in kept]
            depths[(v, i)] = max(len(p) for p, _ in kept)

    if subspaces:
        allcols = np.hstack(list(subspaces.values()))
        ortho = opnorm(allcols.conj().T @ allcols - np.eye(allcols.shape[1]))
        span = orthonormal_columns(allcols, 1e-8)
    else:
        ortho = 0.0
        span = np.zeros((fam.dim, 0), dtype=complex)
    comp = complement(span, fam.dim)

    complete = all(
        [p for p in paths[k]] == list(enumerate_paths(g, max(depths[k], 1), source=k[0]).paths)
        for k in subspaces
    )
    diag = {
        "orthogonality_defect": ortho,
        "generation_leak": leak,
        "norm_defect": norm_err,
        "eigenvalue_defect": eig_err,
        "complete_blocks": complete,
    }
    reduce_def = 0.0
    inter = 0.0
    for k, cols in subspaces.items():
        if not complete:
            break
        pi = build_pi_v(g, k[0], max(depths[k], 1))
        for name, a in fam.generators():
            reduce_def = max(reduce_def, opnorm(a @ cols - cols @ (cols.conj().T @ a @ cols)))
        inter = max(inter, _block_defect(fam, cols, pi))
    diag["reducing_defect"] = reduce_def
    diag["intertwining_defect"] = inter

    comp_fam = None
    if comp.shape[1]:
        comp_fam = restrict(fam, comp, tol=max(tol, 10 * ortho, 10 * reduce_def))
        rep = check_tck(comp_fam, tol)
        diag["complement_class"] = rep.classification
        diag["complement_defect"] = max(
            (d["norm"] for per in rep.defects.values() for d in per.values()), default=0.0
        )
    else:
        diag["complement_class"] = "FULL_CK"
        diag["complement_defect"] = 0.0
    return WoldDecomposition(
        fam.dim, alpha, wandering, subspaces, paths, depths, comp, comp_fam, diag
    )


def _block_defect(fam: OperatorFamily, cols: np.ndarray, model: OperatorFamily) -> float:
    ch = cols.conj().T
    worst = 0.0
    for v in fam.graph.vertices:
        worst = max(worst, opnorm(ch @ fam.P[v] @ cols - model.P[v]))
    for e in fam.graph.edges:
        worst = max(worst, opnorm(ch @ fam.S[e.id] @ cols - model.S[e.id]))
    return worst


def reconstruct(w: WoldDecomposition, g, depth: int) -> OperatorFamily:
    """``(+)_v pi_v^(alpha_v) (+) complement`` at the given depth."""
    for k, d in w.depths.items():
        if max(d, 1) != depth:
            raise WoldError(f"block {k} has depth {d}, not {depth}")
    parts = []
    for v in sorted(w.multiplicities, key=g.vertex_index):
        parts.extend([build_pi_v(g, v, depth)] * w.multiplicities[v])
    if w.complement_family is not None:
        parts.append(w.complement_family)
    if not parts:
        raise WoldError("empty decomposition")
    return direct_sum(parts)


def equivalence_isometry(w: WoldDecomposition) -> np.ndarray:
    """Columns ordered like :func:`reconstruct`: every block, then the complement."""
    g_order = sorted(w.subspaces, key=lambda k: k)
    by_vertex: dict = {}
    for k in g_order:
        by_vertex.setdefault(k[0], []).append(w.subspaces[k])
    cols = []
    for v in w.multiplicities:
        cols.extend(by_vertex.get(v, []))
    cols.append(w.complement)
    return np.hstack(cols) if cols else np.zeros((w.dim, 0))


def intertwining_defect(fam: OperatorFamily, w: WoldDecomposition, model: OperatorFamily) -> float:
    """``max ||W^* A W - A_model||`` over generators, W from :func:`equivalence_isometry`."""
    u = equivalence_isometry(w)
    if u.shape[1] != model.dim:
        raise WoldError(
            f"dimension mismatch: decomposition spans {u.shape[1]}, model has {model.dim}"
        )
    return _block_defect(fam, u, model)


def full_ck_part(fam: OperatorFamily, tol: float | None = None):
    """The Wold complement and the family restricted to it."""
    w = wold_decompose(fam, tol)
    return w.complement, w.complement_family


def interior_trivial(fam: OperatorFamily | None, cols: np.ndarray | None = None,
                     tol: float = 1e-9) -> bool:
    """True when the subspace meets the interior trivially."""
    if fam is None:
        return True
    pi = fam.interior if cols is None else cols.conj().T @ fam.interior @ cols
    return pi.size == 0 or opnorm(pi) <= tol


def joint_closure(fam: OperatorFamily, seeds: np.ndarray, cut: float = 1e-8) -> np.ndarray:
    """Smallest subspace containing ``seeds`` and invariant under every P, S, S^*."""
    q = orthonormal_columns(seeds, cut)
    gens = [a for _, a in fam.generators()]
    while True:
        img = np.hstack([a @ q for a in gens]) if q.shape[1] else q
        resid = img - q @ (q.conj().T @ img)
        if resid.size == 0:
            return q
        u, s, _ = np.linalg.svd(resid, full_matrices=False)
        new = u[:, s > cut]
        if new.shape[1] == 0:
            return q
        q = orthonormal_columns(np.hstack([q, new]), cut)


def max_full_ck_subspace(fam: OperatorFamily, tol: float | None = None,
                         color_order=None, return_info: bool = False):
    """Largest common reducing subspace on which every color is full CK.

    Each pass collects the interior defect ranges of all colors inside the
    current subspace K, closes them under the whole family, and removes the
    closure from K.  Any full-CK reducing subspace M is orthogonal to every
    defect range, hence to the closure, so M stays inside K throughout.
    """
    tol = fam.tol if tol is None else tol
    g = fam.graph
    colors = list(color_order) if color_order is not None else list(g.colors)
    k_cols = np.eye(fam.dim, dtype=complex)
    passes = 0
    while k_cols.shape[1]:
        passes += 1
        sub = restrict(fam, k_cols, tol=tol)
        seeds = []
        for c in colors:
            for v in sorted(receivers(g.color_subgraph(c)), key=g.vertex_index):
                d = defect_matrix(sub, v, c)
                w, vec = np.linalg.eigh(d)
                cut = rank_threshold(sub.dim, max(float(np.max(np.abs(w))), 1.0), tol)
                seeds.extend(vec[:, k] for k in np.where(w > cut)[0])
        if not seeds:
            break
        closure = joint_closure(sub, np.column_stack(seeds))
        k_cols = k_cols @ complement(closure, sub.dim)
    if return_info:
        return k_cols, {"passes": passes}
    return k_cols

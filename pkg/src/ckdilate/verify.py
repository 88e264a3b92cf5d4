"""Relation checks, defect analysis and commutant probes for operator families."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .family import FamilyError, OperatorFamily
from .graph import receivers
from .linalg import EPS, herm, opnorm, rank_threshold

__all__ = [
    "CLASSES",
    "RelationReport",
    "check_tck",
    "check_full_ck",
    "defect_matrix",
    "singular_vertices",
    "commutant_dimension",
    "class_rank",
]

CLASSES = ("INVALID", "TCK", "CK", "FULL_CK")


def class_rank(c: str) -> int:
    return CLASSES.index(c)


@dataclass
class RelationReport:
    tol: float
    classification: str
    isometry_residuals: dict
    tck_slack: dict
    defects: dict
    invariants: dict
    ambiguous: list = field(default_factory=list)

    @property
    def singular(self) -> dict:
        return {
            c: sorted(v for v, d in per.items() if d["rank"] > 0)
            for c, per in self.defects.items()
        }

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "tolerance": self.tol,
            "isometry_residuals": dict(sorted(self.isometry_residuals.items())),
            "tck_slack": {c: dict(sorted(d.items())) for c, d in sorted(self.tck_slack.items())},
            "defects": {
                c: {v: dict(d) for v, d in sorted(per.items())}
                for c, per in sorted(self.defects.items())
            },
            "singular": self.singular,
            "invariants": dict(sorted(self.invariants.items())),
            "ambiguous": sorted(self.ambiguous),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RelationReport":
        return cls(
            tol=doc["tolerance"],
            classification=doc["classification"],
            isometry_residuals=doc["isometry_residuals"],
            tck_slack=doc["tck_slack"],
            defects=doc["defects"],
            invariants=doc["invariants"],
            ambiguous=doc["ambiguous"],
        )


def defect_matrix(fam: OperatorFamily, v: str, color: str | None = None) -> np.ndarray:
    """``Pi (P_v - sum_{r(e)=v} S_e S_e^*) Pi``, summing over one color if given."""
    pi = fam.interior
    d = np.array(fam.P[v])
    for e in fam.graph.edges:
        if e.rng == v and (color is None or e.color == color):
            s = fam.S[e.id]
            d = d - s @ s.conj().T
    return herm(pi @ d @ pi)


def check_tck(fam: OperatorFamily, tol: float | None = None) -> RelationReport:
    """Measure (I), (TCK) and the full-CK defects of every color on the interior.

    On a finite graph the (CK) guard ``0 < |r^{-1}(v)| < inf`` is the same as
    ``r^{-1}(v)`` non-empty, so CK and FULL_CK coincide and only the latter
    is reported.
    """
    tol = fam.tol if tol is None else tol
    g = fam.graph
    pi = fam.interior
    iso = {}
    for e in g.edges:
        s = fam.S[e.id]
        iso[e.id] = opnorm(pi @ (s.conj().T @ s - fam.P[e.src]) @ pi)

    slack: dict = {}
    defects: dict = {}
    ambiguous = []
    for c in g.colors or ("0",):
        sub = g.color_subgraph(c)
        slack[c] = {}
        defects[c] = {}
        for v in sorted(receivers(sub), key=g.vertex_index):
            d = defect_matrix(fam, v, c)
            w = np.linalg.eigvalsh(d)[::-1]
            slack[c][v] = float(w[-1]) if w.size else 0.0
            cut = rank_threshold(fam.dim, max(float(np.max(np.abs(w))), 1.0), tol)
            rank = int(np.sum(w > cut))
            if np.any((w > cut) & (w < np.sqrt(tol))):
                ambiguous.append(f"{c}:{v}")
            defects[c][v] = {
                "norm": float(np.max(np.abs(w))) if w.size else 0.0,
                "rank": rank,
                "spectrum": [float(x) for x in w[: max(rank, 1) + 2]],
            }

    inv = fam.invariant_defects()
    valid = (
        max(inv.values(), default=0.0) <= tol
        and max(iso.values(), default=0.0) <= tol
        and min((x for per in slack.values() for x in per.values()), default=0.0) >= -tol
    )
    if not valid:
        cls = "INVALID"
    elif all(d["norm"] <= tol for per in defects.values() for d in per.values()):
        cls = "FULL_CK"
    else:
        cls = "TCK"
    return RelationReport(tol, cls, iso, slack, defects, inv, ambiguous)


def check_full_ck(fam: OperatorFamily, tol: float | None = None) -> RelationReport:
    return check_tck(fam, tol)


def singular_vertices(fam: OperatorFamily, color: str | None = None,
                      report: RelationReport | None = None) -> set[tuple[str, int]]:
    """Received vertices whose interior defect has positive numerical rank."""
    colors = fam.graph.colors
    if color is None:
        if len(colors) > 1:
            raise FamilyError("colored family: pass the color to inspect")
        color = colors[0] if colors else "0"
    report = check_tck(fam) if report is None else report
    per = report.defects.get(color, {})
    return {(v, d["rank"]) for v, d in per.items() if d["rank"] > 0}


def commutant_dimension(fam: OperatorFamily, max_dim: int = 512, seed: int = 0) -> int:
    """Dimension of ``{X : XA = AX}`` for A over all P_v, S_e, S_e^*.

    The generated algebra is self-adjoint, so its commutant lies inside the
    commutant of any Hermitian element R of the algebra, i.e. X is block
    diagonal over the eigenspaces of R.  R is a random combination of
    generators and their products; a coarse eigenvalue grouping only
    enlarges the search space, so the count stays exact.  The remaining
    unknowns are solved block-component by block-component.
    """
    n = fam.dim
    if n > max_dim:
        raise FamilyError(f"dimension {n} exceeds commutant guard {max_dim}")
    if n == 0:
        return 0
    rng = np.random.default_rng(seed)
    gens = [a for _, a in fam.generators()]
    r = np.zeros((n, n), dtype=complex)
    for a in gens:
        r += rng.standard_normal() * herm(a)
    for _ in range(2 * len(gens)):
        a = gens[rng.integers(len(gens))]
        b = gens[rng.integers(len(gens))]
        r += rng.standard_normal() * herm(a @ b) + rng.standard_normal() * herm(1j * a @ b)
    w, v = np.linalg.eigh(herm(r))

    gap = 1e-6 * max(1.0, float(np.max(np.abs(w))))
    blocks = [[0]]
    for k in range(1, n):
        if w[k] - w[k - 1] <= gap:
            blocks[-1].append(k)
        else:
            blocks.append([k])

    rotated = [v.conj().T @ a @ v for a in gens]
    cut = 1e-8 * max(1.0, max(opnorm(a) for a in gens))
    parent = list(range(len(blocks)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in rotated:
        for i, bi in enumerate(blocks):
            for j, bj in enumerate(blocks):
                if i != j and np.max(np.abs(a[np.ix_(bi, bj)])) > cut:
                    parent[find(i)] = find(j)

    comps: dict[int, list[int]] = {}
    for i in range(len(blocks)):
        comps.setdefault(find(i), []).append(i)

    total = 0
    for members in comps.values():
        if all(len(blocks[i]) == 1 for i in members):
            # diagonal unknowns: (AY - YA)_ij = A_ij (y_j - y_i) forces one constant
            total += 1
            continue
        idx = [k for i in members for k in blocks[i]]
        offsets = []
        nvar = 0
        for i in members:
            offsets.append(nvar)
            nvar += len(blocks[i]) ** 2
        local = {k: p for p, k in enumerate(idx)}
        m = len(idx)
        cols = []
        for bi, off in zip(members, offsets):
            b = blocks[bi]
            for a_ in range(len(b)):
                for c_ in range(len(b)):
                    y = np.zeros((m, m), dtype=complex)
                    y[local[b[a_]], local[b[c_]]] = 1.0
                    cols.append(np.concatenate(
                        [(a[np.ix_(idx, idx)] @ y - y @ a[np.ix_(idx, idx)]).ravel()
                         for a in rotated]))
        mat = np.array(cols).T
        s = np.linalg.svd(mat, compute_uv=False)
        cutoff = max(mat.shape) * EPS * max(float(s[0]) if s.size else 0.0, 1.0) * 1e3
        total += nvar - int(np.sum(s > cutoff))
    return total

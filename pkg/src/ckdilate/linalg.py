"""Small dense linear-algebra helpers shared by the family, verify and wold modules."""

from __future__ import annotations

import numpy as np

EPS = np.finfo(float).eps


def opnorm(a: np.ndarray) -> float:
    """Spectral norm via the top eigenvalue of the smaller Gram matrix.

    Several times cheaper than an SVD and still accurate relative to ``||a||``.
    """
    if a.size == 0:
        return 0.0
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return 0.0
    b = a / scale
    gram = b.conj().T @ b if b.shape[1] <= b.shape[0] else b @ b.conj().T
    top = float(np.linalg.eigvalsh(gram)[-1])
    return scale * float(np.sqrt(max(top, 0.0)))


def rank_threshold(dim: int, smax: float, tol: float | None = None) -> float:
    """Singular values at or below this count as zero.

    The base cut is ``max(D, 64) * eps * smax``; passing ``tol`` raises it to
    at least ``tol`` so rank decisions agree with residual-based ones.
    """
    base = max(dim, 64) * EPS * smax
    return base if tol is None else max(base, tol)


def herm(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def spectral_split(a: np.ndarray, tol: float | None = None):
    """Eigen-decompose a Hermitian matrix, returning (values, vectors, threshold)."""
    w, v = np.linalg.eigh(herm(a))
    smax = float(np.max(np.abs(w))) if w.size else 0.0
    return w, v, rank_threshold(a.shape[0], max(smax, 1.0), tol)


def numerical_rank(a: np.ndarray, tol: float | None = None) -> int:
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > rank_threshold(max(a.shape), max(float(s[0]), 1.0), tol)))


def orthonormal_columns(a: np.ndarray, tol: float | None = None) -> np.ndarray:
    """An orthonormal basis for the column space of ``a``."""
    if a.size == 0 or a.shape[1] == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    k = int(np.sum(s > rank_threshold(max(a.shape), max(float(s[0]), 1.0), tol)))
    return u[:, :k]


def complement(cols: np.ndarray, dim: int, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(cols) in C^dim."""
    if cols.shape[1] == 0:
        return np.eye(dim, dtype=complex)
    proj = np.eye(dim) - cols @ cols.conj().T
    w, v = np.linalg.eigh(herm(proj))
    return v[:, w > 0.5]


def is_orthonormal(cols: np.ndarray, tol: float = 1e-10) -> bool:
    k = cols.shape[1]
    return opnorm(cols.conj().T @ cols - np.eye(k)) <= tol


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase correction."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def block_diag(mats: list[np.ndarray]) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), dtype=complex)
    k = 0
    for m in mats:
        d = m.shape[0]
        out[k:k + d, k:k + d] = m
        k += d
    return out

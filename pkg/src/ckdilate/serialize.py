"""JSON documents for graphs, families, reports, decompositions and certificates.

Floats go through ``json`` using ``repr``, which round-trips IEEE doubles
exactly, so ``load(dump(x)) == x`` bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path as FsPath

import numpy as np

from .dilate import DilationCertificate
from .family import FamilyError, OperatorFamily
from .graph import Graph, GraphError

__all__ = [
    "FormatError",
    "MAX_ENTRIES",
    "load_json",
    "dump_json",
    "dumps",
    "matrix_to_doc",
    "matrix_from_doc",
    "graph_from_doc",
    "family_to_doc",
    "family_from_doc",
    "load_graph",
    "load_family",
    "certificate_from_doc",
]

# refuse to write or read matrices above this many entries
MAX_ENTRIES = 1_000_000


class FormatError(ValueError):
    pass


def load_json(path) -> dict:
    path = FsPath(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise FormatError(f"{path}: file not found") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def dump_json(doc, path) -> None:
    FsPath(path).write_text(dumps(doc))


def matrix_to_doc(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    if a.size > MAX_ENTRIES:
        raise FormatError(
            f"matrix with {a.size} entries exceeds the {MAX_ENTRIES} limit; lower the depth"
        )
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def matrix_from_doc(doc, n: int | None = None, what: str = "matrix") -> np.ndarray:
    try:
        a = np.array(doc, dtype=float)
    except (TypeError, ValueError):
        raise FormatError(f"{what}: entries must be [re, im] pairs") from None
    if a.size == 0 and n == 0:
        return np.zeros((0, 0), dtype=complex)
    if a.ndim != 3 or a.shape[2] != 2:
        raise FormatError(f"{what}: expected rows of [re, im] pairs, got shape {a.shape}")
    if a.shape[0] * a.shape[1] > MAX_ENTRIES:
        raise FormatError(f"{what}: exceeds the {MAX_ENTRIES}-entry limit")
    if n is not None and a.shape[:2] != (n, n):
        raise FormatError(f"{what}: shape {a.shape[:2]} does not match dimension {n}")
    # a + 1j*b would turn -0.0 real parts into +0.0
    out = np.empty(a.shape[:2], dtype=complex)
    out.real, out.imag = a[:, :, 0], a[:, :, 1]
    return out


def graph_from_doc(doc, base: FsPath | None = None) -> Graph:
    if isinstance(doc, str):
        ref = FsPath(doc)
        if base is not None and not ref.is_absolute():
            ref = base / ref
        doc = load_json(ref)
    if not isinstance(doc, dict):
        raise FormatError("graph must be an object or a file reference")
    try:
        return Graph.from_dict(doc)
    except GraphError as exc:
        raise FormatError(str(exc)) from None


def load_graph(path) -> Graph:
    return graph_from_doc(load_json(path))


def _interior_to_doc(pi: np.ndarray):
    d = np.diag(pi)
    if np.array_equal(pi, np.diag(d)) and np.all((d == 0) | (d == 1)):
        if np.all(d == 1):
            return "all"
        return [int(k) for k in np.nonzero(d == 1)[0]]
    # non-diagonal interior projections, e.g. after conjugation
    return {"matrix": matrix_to_doc(pi)}


def _interior_from_doc(doc, n: int) -> np.ndarray:
    if doc == "all":
        return np.eye(n, dtype=complex)
    if isinstance(doc, dict) and "matrix" in doc:
        return matrix_from_doc(doc["matrix"], n, "interior")
    if isinstance(doc, list):
        pi = np.zeros((n, n), dtype=complex)
        for k in doc:
            if not isinstance(k, int) or not 0 <= k < n:
                raise FormatError(f"interior index {k!r} out of range for dimension {n}")
            pi[k, k] = 1.0
        return pi
    raise FormatError('interior must be "all", an index list, or {"matrix": ...}')


def family_to_doc(fam: OperatorFamily, graph_ref: str | None = None) -> dict:
    if fam.dim * fam.dim * (len(fam.P) + len(fam.S)) > 20 * MAX_ENTRIES:
        raise FormatError("family too large to serialize; lower the depth")
    doc = {
        "graph": graph_ref if graph_ref is not None else fam.graph.to_dict(),
        "dimension": fam.dim,
        "interior": _interior_to_doc(fam.interior),
        "P": {v: matrix_to_doc(m) for v, m in fam.P.items()},
        "S": {e: matrix_to_doc(m) for e, m in fam.S.items()},
        "tolerance": fam.tol,
    }
    if fam.depth is not None:
        doc["depth"] = fam.depth
    if fam.labels is not None:
        doc["labels"] = list(fam.labels)
    return doc


def family_from_doc(doc: dict, base: FsPath | None = None) -> OperatorFamily:
    if not isinstance(doc, dict):
        raise FormatError("family document must be an object")
    for key in ("graph", "dimension", "interior", "P", "S"):
        if key not in doc:
            raise FormatError(f"family document missing {key!r}")
    g = graph_from_doc(doc["graph"], base)
    n = doc["dimension"]
    if not isinstance(n, int) or n < 0:
        raise FormatError("dimension must be a non-negative integer")
    if set(doc["P"]) != set(g.vertices):
        raise FormatError("P keys do not match the graph's vertices")
    if set(doc["S"]) != {e.id for e in g.edges}:
        raise FormatError("S keys do not match the graph's edges")
    P = {v: matrix_from_doc(doc["P"][v], n, f"P[{v}]") for v in g.vertices}
    S = {e.id: matrix_from_doc(doc["S"][e.id], n, f"S[{e.id}]") for e in g.edges}
    labels = tuple(doc["labels"]) if "labels" in doc else None
    try:
        return OperatorFamily(
            g, P, S, _interior_from_doc(doc["interior"], n),
            tol=doc.get("tolerance", 1e-9), labels=labels, depth=doc.get("depth"),
        )
    except FamilyError as exc:
        raise FormatError(str(exc)) from None


def load_family(path) -> OperatorFamily:
    path = FsPath(path)
    return family_from_doc(load_json(path), path.parent)


def certificate_from_doc(doc: dict):
    emb = np.array(doc["embedding"], dtype=float)
    emb = emb[..., 0] + 1j * emb[..., 1] if emb.size else np.zeros((0, 0), dtype=complex)
    return DilationCertificate(
        embedding=emb,
        max_degree=doc["max_degree"],
        compression_error=doc["compression_error"],
        defects=doc["defects"],
        depth=doc["depth"],
        tol=doc["tolerance"],
        complete=doc["complete"],
        notes=doc["notes"],
    )

"""Command-line entry point: ``ckdilate <command> [options]``.

Exit status: 0 on success, 2 when the input family is INVALID (the report
is still written), 1 on usage, parse or file errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path as FsPath

from . import __version__
from .dilate import (
    DilationError,
    colored_full_ck_dilation,
    compression_certificate,
    full_ck_dilation,
    one_step_dilation,
    required_inflation,
)
from .family import (
    DEFAULT_TOL,
    FamilyError,
    build_cycle_exact,
    build_fock,
    build_pi_v,
    build_rho_infty,
    inflate,
)
from .graph import GraphError
from .serialize import (
    FormatError,
    dump_json,
    dumps,
    family_to_doc,
    graph_from_doc,
    load_family,
    load_json,
)
from .staralg import ParseError, parse_element
from .verify import check_tck, commutant_dimension
from .wold import wold_decompose

COMMANDS = ("verify", "wold", "dilate", "normalform", "report", "build")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    graph: str | None = None
    family: str | None = None
    expression: str | None = None
    out: str | None = None
    depth: int = 4
    max_degree: int = 3
    tol: float = DEFAULT_TOL
    seed: int = 0
    color_order: tuple | None = None
    mode: str = "full"
    vertex: str | None = None
    inflation: int | None = None
    kind: str = "fock"

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.depth < 1 or self.max_degree < 1 or not self.tol > 0 or self.seed < 0:
            raise UsageError("depth, max-degree and tol must be positive and seed non-negative")
        if self.inflation is not None and self.inflation < 1:
            raise UsageError("inflation must be positive")
        needs_family = {"verify", "wold", "dilate", "report"}
        if self.command in needs_family and not self.family:
            raise UsageError(f"{self.command} needs --family")
        if self.command in ("normalform", "build") and not self.graph:
            raise UsageError(f"{self.command} needs --graph")
        if self.command == "normalform" and not self.expression:
            raise UsageError("normalform needs an expression")


def _meta(cfg: RunConfig) -> dict:
    return {"version": __version__, "tolerance": cfg.tol, "depth": cfg.depth, "seed": cfg.seed}


def _load(cfg: RunConfig):
    fam = load_family(cfg.family)
    return fam.with_tol(cfg.tol)


def _table(rows, header) -> str:
    rows = [header] + [[str(x) for x in r] for r in rows]
    widths = [max(len(r[k]) for r in rows) for k in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def _cmd_verify(cfg):
    fam = _load(cfg)
    rep = check_tck(fam)
    doc = {"meta": _meta(cfg), "report": rep.to_dict()}
    rows = [
        [c, v, f"{d['norm']:.3e}", d["rank"]]
        for c, per in sorted(rep.defects.items()) for v, d in per.items()
    ]
    text = f"classification: {rep.classification}\n" + _table(rows, ["color", "vertex", "defect", "rank"])
    return (2 if rep.classification == "INVALID" else 0), doc, text


def _cmd_wold(cfg):
    fam = _load(cfg)
    rep = check_tck(fam)
    if rep.classification == "INVALID":
        return 2, {"meta": _meta(cfg), "report": rep.to_dict()}, "classification: INVALID"
    w = wold_decompose(fam)
    doc = {"meta": _meta(cfg), "decomposition": w.to_dict()}
    rows = [[v, a] for v, a in w.multiplicities.items()]
    text = _table(rows, ["vertex", "alpha"]) + f"\ncomplement dimension: {w.complement.shape[1]}"
    return 0, doc, text


def _cmd_dilate(cfg):
    fam = _load(cfg)
    rep = check_tck(fam)
    if rep.classification == "INVALID":
        return 2, {"meta": _meta(cfg), "report": rep.to_dict()}, "classification: INVALID"
    g = fam.graph
    if cfg.mode == "one-step":
        if not cfg.vertex:
            raise UsageError("one-step mode needs --vertex")
        m = cfg.inflation or required_inflation(fam, cfg.vertex, cfg.depth)
        dil, cert = one_step_dilation(fam, cfg.vertex, m, cfg.depth)
    elif len(g.colors) > 1:
        dil, cert = colored_full_ck_dilation(fam, cfg.depth, color_order=cfg.color_order)
    else:
        dil, cert = full_ck_dilation(fam, cfg.depth)
    if cfg.max_degree != cert.max_degree:
        # recompute at the requested degree
        original = fam if cfg.mode != "one-step" else inflate(fam, cert.notes["inflation"])
        notes = cert.notes
        cert = compression_certificate(original, dil, cert.embedding, cfg.max_degree)
        cert.notes.update({k: v for k, v in notes.items() if k != "classification"})
    cdoc = {"meta": _meta(cfg), "certificate": cert.to_dict()}
    fdoc = family_to_doc(dil)
    fdoc["meta"] = _meta(cfg)
    text = (
        f"dilated dimension: {dil.dim}\n"
        f"compression error (degree <= {cert.max_degree}): {cert.compression_error:.3e}\n"
        f"max interior defect: {cert.max_defect:.3e}\ncomplete: {cert.complete}"
    )
    return 0, {"family": fdoc, "certificate": cdoc}, text


def _cmd_normalform(cfg):
    g = graph_from_doc(load_json(cfg.graph))
    el = parse_element(cfg.expression, g)
    text = str(el)
    doc = {"meta": _meta(cfg), "expression": cfg.expression, "normal_form": text}
    return 0, doc, text


def _cmd_report(cfg):
    fam = _load(cfg)
    rep = check_tck(fam)
    doc = {"meta": _meta(cfg), "report": rep.to_dict(), "dimension": fam.dim}
    lines = [f"dimension: {fam.dim}", f"classification: {rep.classification}"]
    if rep.classification == "INVALID":
        return 2, doc, "\n".join(lines)
    doc["singular"] = rep.singular
    sing = ", ".join(f"{c}:{v}" for c, vs in sorted(rep.singular.items()) for v in vs)
    lines.append(f"singular: {sing or 'none'}")
    if len(fam.graph.colors) <= 1:
        w = wold_decompose(fam)
        doc["multiplicities"] = dict(sorted(w.multiplicities.items()))
        lines.append(_table([[v, a] for v, a in w.multiplicities.items()], ["vertex", "alpha"]))
    if fam.dim <= 512:
        doc["commutant_dimension"] = commutant_dimension(fam, seed=cfg.seed)
        lines.append(f"commutant dimension: {doc['commutant_dimension']}")
    return 0, doc, "\n".join(lines)


def _cmd_build(cfg):
    g = graph_from_doc(load_json(cfg.graph), FsPath(cfg.graph).parent)
    if cfg.kind == "fock":
        fam = build_fock(g, cfg.depth, cfg.tol)
    elif cfg.kind == "pi":
        if not cfg.vertex:
            raise UsageError("--kind pi needs --vertex")
        fam = build_pi_v(g, cfg.vertex, cfg.depth, cfg.tol)
    elif cfg.kind == "rho":
        fam = build_rho_infty(g, depth=cfg.depth, tol=cfg.tol)
    elif cfg.kind == "cycle":
        fam = build_cycle_exact(g, tol=cfg.tol)
    else:
        raise UsageError(f"unknown family kind {cfg.kind!r}")
    doc = family_to_doc(fam)
    doc["meta"] = _meta(cfg)
    return 0, doc, f"built {cfg.kind} family of dimension {fam.dim}"


_HANDLERS = {
    "verify": _cmd_verify,
    "wold": _cmd_wold,
    "dilate": _cmd_dilate,
    "normalform": _cmd_normalform,
    "report": _cmd_report,
    "build": _cmd_build,
}


def run(cfg: RunConfig) -> tuple[int, dict, str]:
    """Execute one command; returns (exit status, output documents, summary text)."""
    cfg.validate()
    return _HANDLERS[cfg.command](cfg)


def _write(cfg: RunConfig, docs: dict) -> None:
    if cfg.command == "dilate" and "certificate" in docs:
        if cfg.out:
            out = FsPath(cfg.out)
            dump_json(docs["family"], out)
            dump_json(docs["certificate"], out.with_name(out.stem + ".certificate.json"))
        return
    if cfg.out:
        dump_json(docs, cfg.out)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ckdilate", description="Toeplitz-Cuntz-Krieger family workbench")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="write the JSON document here")
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
        sp.add_argument("--depth", type=int, default=4)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--json", action="store_true", help="print JSON instead of a table")

    for name in ("verify", "wold", "report"):
        sp = sub.add_parser(name)
        sp.add_argument("--family", required=True)
        common(sp)
    sp = sub.add_parser("dilate")
    sp.add_argument("--family", required=True)
    sp.add_argument("--max-degree", type=int, default=3)
    sp.add_argument("--color-order", help="comma-separated colors")
    sp.add_argument("--mode", choices=("full", "one-step"), default="full")
    sp.add_argument("--vertex")
    sp.add_argument("--inflation", type=int)
    common(sp)
    sp = sub.add_parser("normalform")
    sp.add_argument("expression")
    sp.add_argument("--graph", required=True)
    common(sp)
    sp = sub.add_parser("build")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--kind", choices=("fock", "pi", "rho", "cycle"), default="fock")
    sp.add_argument("--vertex")
    common(sp)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    kw = {k: v for k, v in vars(ns).items() if k in RunConfig.__dataclass_fields__ and v is not None}
    if kw.get("color_order"):
        kw["color_order"] = tuple(c.strip() for c in kw["color_order"].split(","))
    return RunConfig(**kw)


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = config_from_args(ns)
        status, docs, text = run(cfg)
        _write(cfg, docs)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 1
    except (FormatError, GraphError, FamilyError, DilationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if ns.json:
        sys.stdout.write(dumps(docs))
    else:
        print(text)
    return status


__all__ = ["RunConfig", "UsageError", "run", "main", "build_parser", "config_from_args"]

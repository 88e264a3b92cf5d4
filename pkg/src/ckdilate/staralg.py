"""Symbolic *-algebra on p_v, s_e, s_e^* with normal forms s_mu s_nu^*.

Rewriting uses

    s_e^* s_e -> p_{s(e)}        s_e^* s_f -> 0  (e != f)
    p_v p_w   -> delta_vw p_v    p_v s_e -> [r(e) = v] s_e
    s_e p_v   -> [s(e) = v] s_e  (and the adjoint rules)

The rule ``s_e^* s_f -> 0`` is not one of the defining relations; it follows
from (TCK) because the ranges of distinct S_e are orthogonal.  Products
``s_e s_f^*`` never reduce.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph, GraphError, Path

__all__ = [
    "PURGE",
    "Monomial",
    "AlgElement",
    "FreeElement",
    "ParseError",
    "generator",
    "normal_form",
    "multiply",
    "adjoint",
    "evaluate",
    "parse_word",
    "parse_expression",
    "parse_element",
]

PURGE = 1e-14


@dataclass(frozen=True)
class Monomial:
    """``s_mu s_nu^*``; the zero product s(mu) != s(nu) is never constructed."""

    mu: Path
    nu: Path

    def __post_init__(self):
        if self.mu.src != self.nu.src:
            raise GraphError("monomial with s(mu) != s(nu) is zero")

    @property
    def degree(self) -> int:
        return len(self.mu) + len(self.nu)

    @property
    def is_projection(self) -> bool:
        return not self.mu.edges and not self.nu.edges

    def star(self) -> "Monomial":
        return Monomial(self.nu, self.mu)

    def __str__(self):
        if self.is_projection:
            return f"p({self.mu.src})"
        parts = [f"s({e})" for e in self.mu.edges]
        parts += [f"s*({e})" for e in reversed(self.nu.edges)]
        return " ".join(parts)


def _strip_prefix(g: Graph, long: Path, short: Path) -> Path | None:
    """``x`` with ``long = short x``, or None."""
    if long.rng != short.rng or long.edges[: len(short)] != short.edges:
        return None
    rest = long.edges[len(short):]
    if not rest:
        return g.vertex_path(short.src)
    return Path(rest, long.src, g.rng(rest[0]))


def mono_mul(g: Graph, a: Monomial, b: Monomial) -> Monomial | None:
    """(s_mu s_nu^*)(s_alpha s_beta^*) in normal form, None if zero."""
    rest = _strip_prefix(g, b.mu, a.nu)
    if rest is not None:
        return Monomial(g.compose(a.mu, rest), b.nu)
    rest = _strip_prefix(g, a.nu, b.mu)
    if rest is not None:
        return Monomial(a.mu, g.compose(b.nu, rest))
    return None


def generator(g: Graph, kind: str, ident: str) -> Monomial:
    if kind == "p":
        p = g.vertex_path(ident)
        return Monomial(p, p)
    e = g.path([ident])
    src = g.vertex_path(e.src)
    if kind == "s":
        return Monomial(e, src)
    if kind == "s*":
        return Monomial(src, e)
    raise GraphError(f"unknown generator kind {kind!r}")


class AlgElement:
    """Finitely supported combination of normal-form monomials."""

    def __init__(self, graph: Graph, terms: dict | None = None):
        self.graph = graph
        terms = dict(terms or {})
        scale = max((abs(c) for c in terms.values()), default=0.0)
        cut = PURGE * max(scale, 1.0)
        self.terms = {m: complex(c) for m, c in terms.items() if abs(c) > cut}

    @classmethod
    def from_monomial(cls, g: Graph, m: Monomial, c: complex = 1.0) -> "AlgElement":
        return cls(g, {m: c})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "AlgElement") -> "AlgElement":
        _same_graph(self, other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return AlgElement(self.graph, out)

    def __sub__(self, other: "AlgElement") -> "AlgElement":
        return self + other.scale(-1)

    def scale(self, c: complex) -> "AlgElement":
        return AlgElement(self.graph, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, AlgElement):
            return multiply(self, other)
        return self.scale(other)

    __rmul__ = scale

    def __eq__(self, other):
        if not isinstance(other, AlgElement) or other.graph != self.graph:
            return NotImplemented
        return (self - other).is_zero()

    def sorted_terms(self):
        key = self.graph.path_key
        return sorted(self.terms.items(), key=lambda mc: (key(mc[0].mu), key(mc[0].nu)))

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for m, c in self.sorted_terms():
            out.append(str(m) if c == 1 else f"{_fmt_coeff(c)} {m}")
        return " + ".join(out)

    __repr__ = __str__


def _fmt_coeff(c: complex) -> str:
    def num(x):
        return repr(float(x)).removesuffix(".0")

    if c.imag == 0:
        return num(c.real)
    if c.real == 0:
        return f"{num(c.imag)}i"
    sign = "+" if c.imag >= 0 else "-"
    return f"({num(c.real)}{sign}{num(abs(c.imag))}i)"


def _same_graph(a, b):
    if a.graph != b.graph:
        raise GraphError("elements live over different graphs")


def multiply(a: AlgElement, b: AlgElement) -> AlgElement:
    _same_graph(a, b)
    g = a.graph
    out: dict = {}
    for m1, c1 in a.terms.items():
        for m2, c2 in b.terms.items():
            m = mono_mul(g, m1, m2)
            if m is not None:
                out[m] = out.get(m, 0) + c1 * c2
    return AlgElement(g, out)


def adjoint(a: AlgElement) -> AlgElement:
    return AlgElement(a.graph, {m.star(): c.conjugate() for m, c in a.terms.items()})


def _as_generators(g: Graph, word) -> list[Monomial]:
    if isinstance(word, str):
        word = parse_word(word)
    return [generator(g, kind, ident) for kind, ident in word]


def normal_form(g: Graph, word, *, return_steps: bool = False):
    """Reduce a word of generators to an AlgElement.

    ``word`` is a sequence of ``(kind, id)`` pairs with kind in
    {"p", "s", "s*"}, or expression text like ``"s*(e) s(e)"``.
    Each generator is folded in once, so the number of rewrite steps is at
    most the word length.
    """
    gens = _as_generators(g, word)
    steps = 0
    if not gens:
        raise GraphError("empty word has no normal form in a non-unital algebra")
    cur: Monomial | None = gens[0]
    for m in gens[1:]:
        steps += 1
        cur = mono_mul(g, cur, m)
        if cur is None:
            break
    out = AlgElement(g) if cur is None else AlgElement.from_monomial(g, cur)
    return (out, steps) if return_steps else out


def _mono_matrix(m: Monomial, fam) -> np.ndarray:
    return fam.path_operator(m.mu) @ fam.path_operator(m.nu).conj().T


def evaluate(a, fam) -> np.ndarray:
    """Image of an AlgElement or FreeElement under the representation of ``fam``."""
    if a.graph != fam.graph:
        raise GraphError("element and family are over different graphs")
    out = np.zeros((fam.dim, fam.dim), dtype=complex)
    if isinstance(a, FreeElement):
        for word, c in a.terms.items():
            mat = np.eye(fam.dim, dtype=complex)
            for _, m in word:
                mat = mat @ _mono_matrix(m, fam)
            out += c * mat
        return out
    for m, c in a.terms.items():
        out += c * _mono_matrix(m, fam)
    return out


# -- colored (free product) elements ---------------------------------------------


def _push(g: Graph, stack: list, color, m: Monomial) -> bool:
    """Append one factor, merging same-color runs; False if the word vanishes."""
    if m.is_projection:
        if not stack:
            stack.append((None, m))
            return True
        c0, m0 = stack.pop()
        r = mono_mul(g, m0, m)
        return r is not None and _push(g, stack, c0 if not r.is_projection else None, r)
    if stack and stack[-1][0] in (color, None):
        _, m0 = stack.pop()
        r = mono_mul(g, m0, m)
        if r is None:
            return False
        return _push(g, stack, None if r.is_projection else color, r)
    stack.append((color, m))
    return True


def _mono_color(g: Graph, m: Monomial):
    cs = {g.color(e) for e in m.mu.edges + m.nu.edges}
    if len(cs) > 1:
        raise GraphError(f"monomial {m} mixes colors")
    return cs.pop() if cs else None


class FreeElement:
    """Combination of alternating words ``(color, monomial), ...``.

    Vertex projections are color-neutral: they are absorbed into a
    neighbour, and only survive as a one-letter word.
    """

    def __init__(self, graph: Graph, terms: dict | None = None):
        self.graph = graph
        out: dict = {}
        for word, c in (terms or {}).items():
            w = self._normalize(word)
            if w is not None:
                out[w] = out.get(w, 0) + c
        scale = max((abs(c) for c in out.values()), default=0.0)
        cut = PURGE * max(scale, 1.0)
        self.terms = {w: complex(c) for w, c in out.items() if abs(c) > cut}

    def _normalize(self, word) -> tuple | None:
        stack: list = []
        for item in word:
            m = item[1] if isinstance(item, tuple) else item
            if not _push(self.graph, stack, _mono_color(self.graph, m), m):
                return None
        if not stack:
            return None
        return tuple(stack)

    @classmethod
    def from_word(cls, g: Graph, word, c: complex = 1.0) -> "FreeElement":
        return cls(g, {tuple(_as_generators(g, word)): c})

    def __add__(self, other: "FreeElement") -> "FreeElement":
        _same_graph(self, other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return FreeElement(self.graph, out)

    def __mul__(self, other: "FreeElement") -> "FreeElement":
        _same_graph(self, other)
        out: dict = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                key = w1 + w2
                out[key] = out.get(key, 0) + c1 * c2
        return FreeElement(self.graph, out)

    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(
            (" * ".join(str(m) for _, m in w) if c == 1 else
             f"{_fmt_coeff(c)} " + " * ".join(str(m) for _, m in w))
            for w, c in self.terms.items()
        )


# -- expression text ---------------------------------------------------------------


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int, text: str = ""):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos
        self.text = text


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?i?|\.\d+(?:[eE][+-]?\d+)?i?)"
    r"|(?P<gen>s\*|p|s)\((?P<id>[^()\s]*)\)"
    r"|(?P<imag>i)(?![\w(])"
    r"|(?P<op>[()+\-]))"
)

_OPEN_GEN = re.compile(r"(?:s\*|p|s)\([^()\s]*")


def _tokenize(text: str) -> list[tuple[str, object, int]]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            opened = _OPEN_GEN.match(text, start)
            if opened:
                raise ParseError("expected ')' after generator id", opened.end(), text)
            raise ParseError(f"unexpected input {text[start:start + 8]!r}", start, text)
        start = m.start(m.lastgroup)
        if m.group("num"):
            s = m.group("num")
            val = complex(0, float(s[:-1])) if s.endswith("i") else complex(float(s))
            toks.append(("num", val, start))
        elif m.group("gen"):
            ident = m.group("id")
            if not ident:
                raise ParseError("empty generator id", m.start("id"), text)
            toks.append(("gen", (m.group("gen"), ident), m.start("id")))
        elif m.group("imag"):
            toks.append(("num", 1j, start))
        else:
            toks.append((m.group("op"), None, start))
        pos = m.end()
    toks.append(("end", None, len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self, kind):
        t = self.toks[self.k]
        if t[0] != kind:
            raise ParseError(f"expected {kind!r}, found {t[0]!r}", t[2], self.text)
        self.k += 1
        return t

    # combinations are dicts: tuple of (kind, id, pos) -> complex
    def expr(self):
        sign = 1
        if self.peek()[0] == "-":
            self.take("-")
            sign = -1
        out = {w: sign * c for w, c in self.term().items()}
        while self.peek()[0] in "+-":
            op = self.take(self.peek()[0])[0]
            s = 1 if op == "+" else -1
            for w, c in self.term().items():
                out[w] = out.get(w, 0) + s * c
        return out

    def term(self):
        t = self.peek()
        if t[0] not in ("num", "gen", "("):
            raise ParseError(f"expected a factor, found {t[0]!r}", t[2], self.text)
        acc = {(): 1 + 0j}
        while self.peek()[0] in ("num", "gen", "("):
            f = self.factor()
            acc = {w1 + w2: c1 * c2 for w1, c1 in acc.items() for w2, c2 in f.items()}
        return acc

    def factor(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.k += 1
            return {(): val}
        if kind == "gen":
            self.k += 1
            return {((val[0], val[1], pos),): 1 + 0j}
        self.take("(")
        inner = self.expr()
        self.take(")")
        return inner


def parse_expression(text: str) -> dict:
    """Parse expression text into ``{word: coefficient}``; words keep id positions."""
    p = _Parser(text)
    out = p.expr()
    t = p.peek()
    if t[0] != "end":
        raise ParseError(f"unexpected {t[0]!r}", t[2], text)
    return out


def parse_word(text: str) -> list[tuple[str, str]]:
    terms = parse_expression(text)
    if len(terms) != 1 or next(iter(terms.values())) != 1:
        raise ParseError("expected a single word without coefficients", 0, text)
    (word,) = terms
    return [(k, i) for k, i, _ in word]


def parse_element(text: str, g: Graph) -> AlgElement:
    """Parse and normalize expression text over ``g``."""
    out = AlgElement(g)
    for word, c in parse_expression(text).items():
        if c == 0:
            continue
        if not word:
            raise ParseError("scalar term without a generator", 0, text)
        for kind, ident, pos in word:
            ok = g.has_vertex(ident) if kind == "p" else g.has_edge(ident)
            if not ok:
                what = "vertex" if kind == "p" else "edge"
                raise ParseError(f"unknown {what} {ident!r}", pos, text)
        out = out + normal_form(g, [(k, i) for k, i, _ in word]).scale(c)
    return out

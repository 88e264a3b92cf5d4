"""Random graphs and families with known structure, for tests and experiments."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .family import (
    OperatorFamily,
    build_pi_v,
    conjugate,
    direct_sum,
    terminal_cycle_family,
)
from .graph import Graph, count_paths, receivers
from .linalg import random_unitary


@dataclass(frozen=True)
class PlantConfig:
    max_vertices: int = 6
    max_edges: int = 10
    depth: int = 5
    max_alpha: int = 3
    max_cycle_copies: int = 2
    max_dim: int = 400
    colors: tuple = ("0",)


@dataclass
class Planted:
    family: OperatorFamily
    alpha: dict
    cycle_edges: list
    # columns of the planted full-CK block inside the family's space
    full_ck_cols: np.ndarray
    full_ck_family: OperatorFamily | None
    unitary: np.ndarray
    info: dict = field(default_factory=dict)


def random_graph(rng: np.random.Generator, cfg: PlantConfig = PlantConfig()) -> Graph:
    """A graph with a terminal cycle: cycle vertices leave only along the cycle.

    Non-cycle vertices get random edges that may enter the cycle.  With
    several colors the cycle is monochrome and entries into it use the
    cycle's color, so an exact cycle block is full CK for every color.
    """
    n = int(rng.integers(2, cfg.max_vertices + 1))
    verts = [f"v{k}" for k in range(n)]
    length = int(rng.integers(1, min(3, n) + 1))
    cyc = verts[:length]
    cyc_color = cfg.colors[0]
    edges = []
    for k, v in enumerate(cyc):
        edges.append((f"c{k}", v, cyc[(k + 1) % length], cyc_color))
    rest = verts[length:]
    budget = cfg.max_edges - length
    if rest and budget > 0:
        for k in range(int(rng.integers(1, budget + 1))):
            src = rest[int(rng.integers(len(rest)))]
            dst = verts[int(rng.integers(n))]
            color = cyc_color if dst in cyc else cfg.colors[int(rng.integers(len(cfg.colors)))]
            edges.append((f"e{k}", src, dst, color))
    return Graph(verts, edges)


def plant(rng: np.random.Generator, cfg: PlantConfig = PlantConfig(), graph: Graph | None = None,
          attempts: int = 50) -> Planted:
    """``(+)_v pi_v^(alpha_v) (+)`` exact cycle blocks, conjugated by a Haar unitary."""
    for _ in range(attempts):
        g = random_graph(rng, cfg) if graph is None else graph
        out = _try_plant(rng, cfg, g)
        if out is not None:
            return out
    raise RuntimeError("could not draw a planted family under the dimension cap")


def _try_plant(rng, cfg, g):
    cyc = [e.id for e in g.edges if e.id.startswith("c")]
    alpha = {}
    sizes = {}
    for v in sorted(receivers(g), key=g.vertex_index):
        a = int(rng.integers(0, cfg.max_alpha + 1))
        alpha[v] = a
        if a:
            sizes[v] = count_paths(g, cfg.depth, v)
    copies = int(rng.integers(0, cfg.max_cycle_copies + 1))
    if sum(alpha[v] * n for v, n in sizes.items()) + copies * len(cyc) > cfg.max_dim:
        return None
    parts = []
    for v, n in sizes.items():
        parts.extend([build_pi_v(g, v, cfg.depth)] * alpha[v])
    cycles = [
        terminal_cycle_family(g, cyc, np.exp(2j * np.pi * rng.random(len(cyc))))
        for _ in range(copies)
    ]
    total = sum(p.dim for p in parts) + sum(c.dim for c in cycles)
    if total == 0 or total > cfg.max_dim:
        return None
    block = direct_sum(parts + cycles) if len(parts + cycles) > 1 else (parts + cycles)[0]
    u = random_unitary(block.dim, rng)
    fam = conjugate(block, u)
    head = sum(p.dim for p in parts)
    cols = u[:, head:]
    cyc_fam = (direct_sum(cycles) if len(cycles) > 1 else cycles[0]) if cycles else None
    return Planted(fam, alpha, cyc, cols, cyc_fam, u, {"sizes": sizes, "cycle_copies": copies})


def complement_intertwining(planted: Planted, comp: np.ndarray, comp_family) -> float:
    """How far the recovered complement is from the planted full-CK block.

    ``W = B^* K`` sends the recovered basis to the planted one; returns the
    larger of ``||W^*W - I||`` and ``max ||W A_K - A_B W||`` over generators.
    """
    b = planted.full_ck_cols
    if comp.shape[1] != b.shape[1]:
        return float("inf")
    if b.shape[1] == 0:
        return 0.0
    w = b.conj().T @ comp
    err = float(np.linalg.norm(w.conj().T @ w - np.eye(w.shape[1]), 2))
    model = planted.full_ck_family
    for (_, ak), (_, ab) in zip(comp_family.generators(), model.generators()):
        err = max(err, float(np.linalg.norm(w @ ak - ab @ w, 2)))
    return err


def random_colored_graph(rng: np.random.Generator, n_max: int = 4, e_max: int = 6) -> Graph:
    cfg = PlantConfig(max_vertices=n_max, max_edges=e_max, colors=("r", "b"))
    while True:
        g = random_graph(rng, cfg)
        if len(g.colors) == 2:
            return g

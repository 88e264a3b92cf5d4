import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ckdilate.graph import (
    Graph,
    GraphError,
    Path,
    Symbol,
    Tail,
    TailSelection,
    count_backward_basis,
    count_paths,
    enumerate_backward_basis,
    enumerate_paths,
    receivers,
    reduce_symbol,
    select_tails,
)
from oracles import brute_paths, suite_graphs


@st.composite
def graphs(draw, max_v=4, max_e=6):
    n = draw(st.integers(1, max_v))
    verts = [f"v{k}" for k in range(n)]
    m = draw(st.integers(0, max_e))
    edges = [
        (f"e{k}", verts[draw(st.integers(0, n - 1))], verts[draw(st.integers(0, n - 1))])
        for k in range(m)
    ]
    return Graph(verts, edges)


def test_rejects_bad_graphs():
    with pytest.raises(GraphError):
        Graph(["v", "v"], [])
    with pytest.raises(GraphError):
        Graph(["v"], [("e", "v", "w")])
    with pytest.raises(GraphError):
        Graph(["v"], [("e", "v", "v"), ("e", "v", "v")])


def test_path_convention_right_to_left():
    g = suite_graphs()["chain"]
    p = g.path(["y", "x"])  # x first, then y
    assert p.src == "a" and p.rng == "c" and len(p) == 2
    with pytest.raises(GraphError):
        g.path(["x", "y"])
    assert g.compose(g.path(["y"]), g.path(["x"])) == p


def test_length_zero_paths_are_vertices():
    g = suite_graphs()["loop"]
    p = g.vertex_path("v")
    assert p.src == p.rng == "v" and len(p) == 0


@pytest.mark.parametrize("name", list(suite_graphs()))
@pytest.mark.parametrize("depth", [0, 1, 3])
def test_enumeration_matches_brute_force(name, depth):
    g = suite_graphs()[name]
    ours = {(p.edges, p.src) for p in enumerate_paths(g, depth).paths}
    assert ours == set(brute_paths(g, depth))
    assert len(ours) == len(enumerate_paths(g, depth).paths)


def test_ordering_length_major_then_declaration_order():
    g = suite_graphs()["two_loops"]
    labels = [p.edges for p in enumerate_paths(g, 2).paths]
    assert labels == [(), ("e",), ("f",), ("e", "e"), ("e", "f"), ("f", "e"), ("f", "f")]


def test_index_map_and_source_filter():
    g = suite_graphs()["mixed"]
    b = enumerate_paths(g, 3)
    assert all(b.index[p] == k for k, p in enumerate(b.paths))
    only_u = enumerate_paths(g, 3, source="u")
    assert all(p.src == "u" for p in only_u.paths)
    assert len(only_u.paths) == count_paths(g, 3, "u")


@settings(max_examples=40, deadline=None)
@given(graphs(), st.integers(0, 3))
def test_enumeration_property(g, depth):
    assert {(p.edges, p.src) for p in enumerate_paths(g, depth).paths} == set(brute_paths(g, depth))


def test_receivers():
    g = suite_graphs()["source_to_loop"]
    assert receivers(g) == {"v"}


def test_tail_selection_closes_cycles():
    g = suite_graphs()["mixed"]
    t = select_tails(g)
    # u <- w <- v <- v (the smallest in-edge of v is a from u, so the walk cycles u,w,v)
    tail = t["u"]
    assert tail.cycle and not tail.is_finite
    t.check(g)
    chain = suite_graphs()["chain"]
    tc = select_tails(chain)
    assert tc["c"] == Tail("c", ("y", "x"))
    assert tc["a"].length == 0


def test_tail_check_rejects_broken_tail():
    g = suite_graphs()["chain"]
    bad = TailSelection({"a": Tail("a", ()), "b": Tail("b", ()), "c": Tail("c", ("y",))})
    with pytest.raises(GraphError):
        bad.check(g)


def test_reduce_symbol_cancels_tail_edges():
    g = suite_graphs()["loop"]
    t = select_tails(g)
    s = reduce_symbol(g, t, g.path(["e", "e"]), "v", 1)
    assert s == Symbol(g.path(["e"]), "v", 0)
    assert s.gauge_degree == 1


def test_loop_backward_basis_depth_one_has_three_symbols():
    g = suite_graphs()["loop"]
    b = enumerate_backward_basis(g, select_tails(g), 1)
    assert sorted(s.gauge_degree for s in b.symbols) == [-1, 0, 1]


@pytest.mark.parametrize("name", list(suite_graphs()))
def test_backward_count_matches_enumeration(name):
    g = suite_graphs()[name]
    t = select_tails(g)
    for v in g.vertices:
        for n in (1, 2, 4):
            assert count_backward_basis(g, t, n, v) == len(enumerate_backward_basis(g, t, n, [v]))


def test_backward_symbols_are_reduced_and_unique():
    g = suite_graphs()["mixed"]
    t = select_tails(g)
    b = enumerate_backward_basis(g, t, 3)
    assert len(set(b.symbols)) == len(b.symbols)
    for s in b.symbols:
        assert b.reduce(s.lam, s.vertex, s.index) == s


def test_graph_json_round_trip():
    g = Graph(["u", "v"], [("a", "u", "v", "r"), ("b", "v", "v", "b")])
    doc = json.loads(json.dumps(g.to_dict()))
    assert Graph.from_dict(doc) == g
    assert Graph.from_dict({"vertices": ["v"], "edges": [{"id": "e", "src": "v", "dst": "v"}]}).color("e") == "0"


def test_color_subgraph():
    g = Graph(["v"], [("e", "v", "v", "r"), ("f", "v", "v", "b")])
    assert g.colors == ("b", "r")
    assert [e.id for e in g.color_subgraph("r").edges] == ["e"]


def test_path_requires_matching_tag():
    with pytest.raises((GraphError, ValueError)):
        Path((), "v", "w")

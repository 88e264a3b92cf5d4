import numpy as np
import pytest

from ckdilate.family import (
    FamilyError,
    NonReducingError,
    OperatorFamily,
    build_cycle_exact,
    build_fock,
    build_pi_v,
    build_rho_infty,
    conjugate,
    direct_sum,
    gauge_action,
    gauge_unitary,
    inflate,
    restrict,
    terminal_cycle_family,
)
from ckdilate.graph import enumerate_backward_basis, receivers, select_tails
from ckdilate.linalg import random_unitary
from ckdilate.verify import check_tck, defect_matrix
from oracles import CYCLE_GRAPHS, suite_graphs

GRAPHS = suite_graphs()
NAMES = list(GRAPHS)


def _interior_iso(fam):
    pi = fam.interior
    return max(
        (np.abs(pi @ (fam.S[e.id].conj().T @ fam.S[e.id] - fam.P[e.src]) @ pi).max()
         for e in fam.graph.edges),
        default=0.0,
    )


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("depth", [1, 3])
def test_fock_relations(name, depth):
    g = GRAPHS[name]
    fam = build_fock(g, depth)
    assert _interior_iso(fam) == 0.0
    rep = check_tck(fam)
    assert rep.classification in ("TCK", "FULL_CK")
    # the defect at a received vertex is exactly the vacuum vector there
    for v in receivers(g):
        d = defect_matrix(fam, v)
        k = fam.labels.index(v)
        expected = np.zeros_like(d)
        expected[k, k] = 1.0
        assert np.array_equal(d, expected)


def test_fock_shift_matrix_entries():
    g = GRAPHS["loop"]
    fam = build_fock(g, 3)
    assert fam.labels == ("v", "e", "e.e", "e.e.e")
    s = fam.S["e"].real
    assert np.array_equal(s, np.diag([1.0, 1.0, 1.0], -1))


def test_pi_v_is_source_restricted_fock():
    g = GRAPHS["mixed"]
    fam = build_pi_v(g, "u", 3)
    assert all(lab.endswith("a") or lab == "u" for lab in fam.labels)
    with pytest.raises(FamilyError):
        build_pi_v(g, "nope", 3)
    with pytest.raises(FamilyError):
        build_pi_v(g, "u", 0)


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("depth", [1, 2, 4])
def test_rho_infty_is_full_ck_on_interior(name, depth):
    fam = build_rho_infty(GRAPHS[name], depth=depth)
    rep = check_tck(fam)
    assert rep.classification == "FULL_CK"
    assert max(rep.isometry_residuals.values(), default=0.0) == 0.0
    assert fam.meta["basis"] == "backward"


def test_rho_loop_depth_one():
    fam = build_rho_infty(GRAPHS["loop"], depth=1)
    assert fam.dim == 3
    # interior is the single vertex symbol
    assert np.trace(fam.interior).real == 1


@pytest.mark.parametrize("name", NAMES)
def test_gauge_covariance(name):
    g = GRAPHS[name]
    t = select_tails(g)
    b = enumerate_backward_basis(g, t, 3)
    fam = build_rho_infty(g, t, 3)
    for z in np.exp(2j * np.pi * np.arange(5) / 5):
        u = gauge_unitary(b, z)
        for v in g.vertices:
            assert np.abs(gauge_action(b, z, fam.P[v]) - fam.P[v]).max() == 0.0
            assert np.abs(u @ fam.P[v] @ u.conj().T - fam.P[v]).max() <= 1e-15
        for e in g.edges:
            diff = fam.interior @ (u @ fam.S[e.id] @ u.conj().T - z * fam.S[e.id]) @ fam.interior
            assert np.abs(diff).max() <= 1e-12
            assert np.allclose(gauge_action(b, z, fam.S[e.id]), u @ fam.S[e.id] @ u.conj().T)


def test_gauge_requires_unit_modulus():
    g = GRAPHS["loop"]
    b = enumerate_backward_basis(g, select_tails(g), 2)
    with pytest.raises(FamilyError):
        gauge_unitary(b, 1.1)


@pytest.mark.parametrize("name", CYCLE_GRAPHS)
def test_exact_cycle_is_unitary(name):
    g = GRAPHS[name]
    fam = build_cycle_exact(g, {e.id: 1j for e in g.edges})
    assert check_tck(fam).classification == "FULL_CK"
    total = sum(fam.S[e.id] for e in g.edges)
    assert np.allclose(total @ total.conj().T, np.eye(fam.dim))


def test_exact_cycle_rejects_other_graphs():
    with pytest.raises(FamilyError):
        build_cycle_exact(GRAPHS["mixed"])


def test_terminal_cycle_rejects_exits():
    g = GRAPHS["loop_with_exit"]
    with pytest.raises(FamilyError):
        terminal_cycle_family(g, ["e"])
    fam = terminal_cycle_family(GRAPHS["source_to_loop"], ["e"], [np.exp(0.3j)])
    assert check_tck(fam).classification == "FULL_CK"


def test_combinators():
    g = GRAPHS["loop"]
    a = build_pi_v(g, "v", 2)
    s = direct_sum([a, build_cycle_exact(g)])
    assert s.dim == 4
    assert s.labels[0] == "0:v"
    assert inflate(a, 3).dim == 9
    u = random_unitary(s.dim, np.random.default_rng(0))
    c = conjugate(s, u)
    assert check_tck(c).classification == "TCK"
    back = restrict(c, u[:, 3:])
    assert check_tck(back).classification == "FULL_CK"


def test_restrict_refuses_non_reducing_subspace():
    fam = build_fock(GRAPHS["loop"], 3)
    cols = np.eye(fam.dim)[:, :2]
    with pytest.raises(NonReducingError) as exc:
        restrict(fam, cols)
    assert exc.value.defect > 0.5


def test_restrict_checks_orthonormality():
    fam = build_fock(GRAPHS["loop"], 3)
    with pytest.raises(FamilyError):
        restrict(fam, 2 * np.eye(fam.dim)[:, :1])


def test_family_is_immutable_and_validated():
    fam = build_fock(GRAPHS["loop"], 2)
    with pytest.raises(ValueError):
        fam.S["e"][0, 0] = 1.0
    with pytest.raises(FamilyError):
        OperatorFamily(fam.graph, fam.P, {}, fam.interior)
    with pytest.raises(FamilyError):
        OperatorFamily(fam.graph, fam.P, {"e": np.zeros((2, 2))}, fam.interior)
    with pytest.raises(FamilyError):
        OperatorFamily(fam.graph, fam.P, fam.S, fam.interior, tol=0.0)


def test_color_family_keeps_only_one_color():
    from ckdilate.graph import Graph

    g = Graph(["v"], [("e", "v", "v", "r"), ("f", "v", "v", "b")])
    fam = build_fock(g, 2)
    r = fam.color_family("r")
    assert list(r.S) == ["e"] and r.dim == fam.dim

import numpy as np
import pytest

from ckdilate.family import (
    FamilyError,
    OperatorFamily,
    build_cycle_exact,
    build_fock,
    build_pi_v,
    build_rho_infty,
    conjugate,
    direct_sum,
)
from ckdilate.graph import Graph, receivers
from ckdilate.linalg import random_unitary
from ckdilate.verify import (
    RelationReport,
    check_tck,
    commutant_dimension,
    singular_vertices,
)
from oracles import CYCLE_GRAPHS, brute_commutant, suite_graphs

GRAPHS = suite_graphs()


def _scaled(fam, c):
    return OperatorFamily(fam.graph, fam.P, {e: c * s for e, s in fam.S.items()}, fam.interior)


def test_classifications():
    loop = GRAPHS["loop"]
    assert check_tck(build_fock(loop, 4)).classification == "TCK"
    assert check_tck(build_rho_infty(loop, depth=4)).classification == "FULL_CK"
    assert check_tck(build_cycle_exact(loop)).classification == "FULL_CK"
    rep = check_tck(_scaled(build_fock(loop, 4), 1.1))
    assert rep.classification == "INVALID"
    assert rep.isometry_residuals["e"] == pytest.approx(0.21)


def test_edgeless_graph_is_full_ck():
    g = Graph(["v"], [])
    fam = OperatorFamily(g, {"v": np.eye(1)}, {}, np.eye(1))
    assert check_tck(fam).classification == "FULL_CK"
    assert commutant_dimension(fam) == 1


def test_tck_violation_detected():
    # two isometries into v with the same range break (TCK)
    g = GRAPHS["multi_edge"]
    p = {"u": np.diag([1, 0]), "v": np.diag([0, 1])}
    s = np.array([[0, 0], [1, 0]])
    fam = OperatorFamily(g, p, {"a": s, "b": s}, np.eye(2))
    rep = check_tck(fam)
    assert rep.classification == "INVALID"
    assert rep.tck_slack["0"]["v"] < -0.5


@pytest.mark.parametrize("name", list(GRAPHS))
def test_pi_v_defect_has_rank_one_at_v_only(name):
    g = GRAPHS[name]
    for v in sorted(receivers(g)):
        fam = build_pi_v(g, v, 4)
        assert singular_vertices(fam) == {(v, 1)}


def test_singular_vertices_needs_color_for_colored_families():
    g = Graph(["v"], [("e", "v", "v", "r"), ("f", "v", "v", "b")])
    fam = build_fock(g, 2)
    with pytest.raises(FamilyError):
        singular_vertices(fam)
    # the red defect at v also contains the vacuum's blue successor f
    assert singular_vertices(fam, "r") == {("v", 2)}


def test_conjugation_preserves_classification_and_ranks():
    g = GRAPHS["mixed"]
    fam = direct_sum([build_pi_v(g, "v", 3), build_pi_v(g, "v", 3)])
    u = random_unitary(fam.dim, np.random.default_rng(2))
    rep = check_tck(conjugate(fam, u))
    assert rep.classification == "TCK"
    assert rep.defects["0"]["v"]["rank"] == 2
    assert not rep.ambiguous


def test_ambiguous_rank_is_flagged():
    # valid family whose defect 1e-5 lies between tol and sqrt(tol)
    g = GRAPHS["loop"]
    b = np.sqrt(1e-5)
    s = np.array([[np.sqrt(1 - b * b), 0], [b, 0]])
    fam = OperatorFamily(g, {"v": np.eye(2)}, {"e": s}, np.diag([1.0, 0.0]), tol=1e-6)
    rep = check_tck(fam)
    assert rep.classification == "TCK"
    assert rep.ambiguous == ["0:v"]


@pytest.mark.parametrize("name", CYCLE_GRAPHS)
def test_commutant_of_exact_cycles_is_trivial(name):
    assert commutant_dimension(build_cycle_exact(GRAPHS[name])) == 1


@pytest.mark.parametrize(
    "fam",
    [
        build_pi_v(GRAPHS["loop"], "v", 4),
        build_fock(GRAPHS["two_cycle"], 3),
        direct_sum([build_cycle_exact(GRAPHS["two_cycle"])] * 2),
        build_fock(GRAPHS["mixed"], 2),
        build_rho_infty(GRAPHS["source_to_loop"], depth=2),
    ],
)
def test_commutant_matches_kronecker_oracle(fam):
    mats = [a for _, a in fam.generators()]
    assert commutant_dimension(fam) == brute_commutant(mats)


def test_commutant_guard():
    fam = build_fock(GRAPHS["two_loops"], 8)
    with pytest.raises(FamilyError):
        commutant_dimension(fam, max_dim=64)


def test_report_round_trip():
    rep = check_tck(build_fock(GRAPHS["mixed"], 3))
    doc = rep.to_dict()
    assert RelationReport.from_dict(doc).to_dict() == doc
    assert doc["singular"] == {"0": ["u", "v", "w"]}

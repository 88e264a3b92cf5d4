import numpy as np
import pytest

from ckdilate.dilate import (
    DilationError,
    colored_full_ck_dilation,
    compression_certificate,
    corner_norms,
    full_ck_dilation,
    one_step_dilation,
    random_tck_dilation,
    required_inflation,
)
from ckdilate.family import (
    build_cycle_exact,
    build_fock,
    build_pi_v,
    build_rho_infty,
    conjugate,
    direct_sum,
    inflate,
    terminal_cycle_family,
)
from ckdilate.graph import Graph
from ckdilate.linalg import random_unitary
from ckdilate.serialize import certificate_from_doc, family_from_doc, family_to_doc
from ckdilate.verify import check_tck
from oracles import suite_graphs

GRAPHS = suite_graphs()


def test_single_loop_isometry_becomes_unitary():
    # the unilateral shift dilates to a bilateral one
    fam = build_fock(GRAPHS["loop"], 4)
    dil, cert = full_ck_dilation(fam, 4)
    assert check_tck(dil).classification == "FULL_CK"
    assert cert.compression_error == 0.0
    s = dil.S["e"]
    pi = dil.interior
    assert np.abs(pi @ (s @ s.conj().T - np.eye(dil.dim)) @ pi).max() == 0.0


@pytest.mark.parametrize("name", list(GRAPHS))
def test_full_ck_dilation_on_suite(name):
    g = GRAPHS[name]
    fam = build_fock(g, 3)
    dil, cert = full_ck_dilation(fam, 3)
    assert cert.holds(1e-9)
    assert cert.notes["classification"] == "FULL_CK"


def test_full_ck_dilation_of_conjugated_mix():
    g = GRAPHS["mixed"]
    blocks = [build_pi_v(g, "u", 3), build_pi_v(g, "v", 3)]
    fam = conjugate(direct_sum(blocks), random_unitary(sum(b.dim for b in blocks), np.random.default_rng(4)))
    dil, cert = full_ck_dilation(fam, 3)
    assert cert.compression_error <= 1e-12
    assert cert.max_defect <= 1e-12
    assert cert.embedding.shape == (dil.dim, fam.dim)


def test_full_ck_input_is_returned_unchanged():
    fam = build_cycle_exact(GRAPHS["two_cycle"])
    dil, cert = full_ck_dilation(fam, 3)
    assert dil is fam and cert.compression_error == 0.0


def test_full_ck_dilation_size_guard():
    with pytest.raises(DilationError):
        full_ck_dilation(build_fock(GRAPHS["two_loops"], 4), 6, max_dim=50)


def test_one_step_dilation():
    fam = build_pi_v(GRAPHS["loop"], "v", 3)
    m = required_inflation(fam, "v", 3)
    assert m == 4  # Fock(loop, 3) has 4 paths ending at v, alpha_v = 1
    dil, cert = one_step_dilation(fam, "v", m, 3)
    assert cert.compression_error == 0.0
    assert check_tck(dil).classification in ("TCK", "FULL_CK")
    assert cert.notes["embedded_defect_rank_before"] == 4
    assert cert.notes["embedded_defect_rank_after"] == 0
    assert cert.notes["max_corner"] == pytest.approx(1.0)


def test_one_step_rejects_non_singular_vertex():
    fam = build_cycle_exact(GRAPHS["loop"])
    with pytest.raises(DilationError):
        one_step_dilation(fam, "v", 1, 2)


def test_one_step_rejects_small_inflation():
    fam = build_pi_v(GRAPHS["loop"], "v", 3)
    with pytest.raises(DilationError, match="m >= 4"):
        one_step_dilation(fam, "v", 2, 3)


def test_random_tck_dilation_of_full_ck_family_is_trivial():
    g = GRAPHS["source_to_loop"]
    fam = terminal_cycle_family(g, ["e"], [1j])
    rng = np.random.default_rng(0)
    dil, emb = random_tck_dilation(fam, rng, 2)
    assert check_tck(dil).classification != "INVALID"
    assert max(max(c) for c in corner_norms(dil, emb).values()) <= 1e-12


def test_random_tck_dilation_of_singular_family_is_tck():
    fam = build_pi_v(GRAPHS["loop"], "v", 3)
    dil, emb = random_tck_dilation(fam, np.random.default_rng(3), 2)
    assert check_tck(dil).classification == "TCK"
    cert = compression_certificate(fam, dil, emb, 2)
    assert cert.compression_error <= 1e-12
    assert corner_norms(dil, emb)["e"][0] > 0.1


def test_colored_dilation_two_loops():
    g = Graph(["v"], [("e", "v", "v", "r"), ("f", "v", "v", "b")])
    fam = build_fock(g, 2)
    dil, cert = colored_full_ck_dilation(fam, 3)
    assert cert.complete
    assert cert.compression_error <= 1e-12
    assert all(x <= 1e-12 for per in cert.defects.values() for x in per.values())
    assert cert.notes["color_order"] == ["b", "r"]


def test_colored_dilation_partial_when_capped():
    g = Graph(["v"], [("e", "v", "v", "r"), ("f", "v", "v", "b")])
    dil, cert = colored_full_ck_dilation(build_fock(g, 2), 6, max_dim=40)
    assert not cert.complete
    assert cert.compression_error <= 1e-12


def test_colored_dilation_validates_color_order():
    g = Graph(["v"], [("e", "v", "v", "r"), ("f", "v", "v", "b")])
    with pytest.raises(DilationError):
        colored_full_ck_dilation(build_fock(g, 2), 2, color_order=["r"])


def test_single_color_colored_route_agrees_with_full_ck():
    g = GRAPHS["loop"]
    fam = build_fock(g, 3)
    _, a = full_ck_dilation(fam, 3)
    _, b = colored_full_ck_dilation(fam, 3)
    assert abs(a.compression_error - b.compression_error) <= 1e-9
    assert abs(a.max_defect - b.max_defect) <= 1e-9


def test_certificate_recomputes_from_serialized_artifacts():
    base = build_fock(GRAPHS["mixed"], 2)
    fam = conjugate(base, random_unitary(base.dim, np.random.default_rng(9)))
    dil, cert = full_ck_dilation(fam, 3)
    fam2 = family_from_doc(family_to_doc(fam))
    dil2 = family_from_doc(family_to_doc(dil))
    cert2 = certificate_from_doc(cert.to_dict())
    again = compression_certificate(fam2, dil2, cert2.embedding, cert2.max_degree)
    assert again.compression_error == cert.compression_error
    assert again.defects == cert.defects


def test_compression_certificate_validates_embedding():
    fam = build_fock(GRAPHS["loop"], 2)
    with pytest.raises(DilationError):
        compression_certificate(fam, fam, np.eye(2), 2)
    with pytest.raises(DilationError):
        compression_certificate(fam, fam, 2 * np.eye(fam.dim), 2)


def test_inflation_keeps_compression():
    fam = build_pi_v(GRAPHS["source_to_loop"], "v", 2)
    infl = inflate(fam, 3)
    emb = np.zeros((infl.dim, fam.dim))
    emb[: fam.dim] = np.eye(fam.dim)
    assert compression_certificate(fam, infl, emb, 3).compression_error == 0.0


def test_rho_is_its_own_dilation():
    fam = build_rho_infty(GRAPHS["mixed"], depth=2)
    dil, cert = full_ck_dilation(fam, 2)
    assert dil is fam

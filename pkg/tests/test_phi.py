import io

import numpy as np
import pytest

from heckecalc.phi import DiagonalPhi, TensorOperator, gram, parse_pairs, trace_pairing
from heckecalc.rep import ConvElement, opnorm

TOL = 1e-9


@pytest.fixture(scope="module")
def phis(s3, s4, f21):
    return {"s3": DiagonalPhi(s3.rep), "s4": DiagonalPhi(s4.rep), "f21": DiagonalPhi(f21.rep)}


def test_phi_of_identity_is_projection(s4, phis):
    phi, P = phis["s4"], s4.rep.P
    e = s4.pair.identity
    assert opnorm(phi.phi_coset(e).matrix() - P) < TOL
    assert opnorm(phi.phi_double(e) - P) < TOL
    assert opnorm(phi.phi_general(e, e).matrix() - P) < TOL
    assert opnorm(P @ P - P) == 0


def test_phi_coset_nonzero_range_in_gamma(s4, phis):
    m = phis["s4"].phi_coset(s4.el("(1 4)")).matrix()
    assert opnorm(m) > 0.1
    outside = [g for g in s4.pair.elements() if not s4.pair.in_gamma(g)]
    assert opnorm(m[outside, :]) == 0 and opnorm(m[:, outside]) == 0


def test_phi_coset_adjoint_swaps_legs(s4, phis):
    op = phis["s4"].phi_coset(s4.el("(1 4)"))
    assert opnorm(op.adjoint().matrix() - op.matrix().conj().T) < TOL


def test_phi_double_self_adjoint_and_square(s4, phis):
    phi, P = phis["s4"], s4.rep.P
    m = phi.phi_double(s4.el("(1 4)"))
    assert opnorm(m - m.conj().T) < TOL
    assert opnorm(m @ m - (3 * P + 2 * m)) < TOL


def test_triple_set_example(s4, phis):
    s = s4.el("(1 4)")
    assert phis["s4"].triple_set(s, s) == frozenset(s4.pair.elements())
    assert phis["s4"].triple_set(s4.pair.identity, s) == s4.pair.double_coset(s)


@pytest.mark.parametrize("name", ["s3", "s4", "f21"])
def test_phi_checks_pass(name, phis):
    results = phis[name].check_all()
    bad = [(r.check_id, r.residual) for r in results if r.status == "fail"]
    assert not bad
    assert {r.check_id for r in results} >= {
        "phi.unit", "phi.compression", "phi.left_right_commute", "phi.multiplicative", "phi.star",
        "phi.adjoint_swap", "phi.hecke_linear", "phi.coset_composition", "phi.single_surviving_term"}


def test_composition_variants_coincide_on_self_inverse_pairs(phis):
    for name in ("s3", "s4"):
        for variant in ("adjoint", "raw", "inverse"):
            assert phis[name].composition_residual(variant)[0] < TOL


def test_composition_variants_on_f21(f21, phis):
    phi = phis["f21"]
    assert phi.composition_residual("adjoint")[0] < TOL
    raw, w_raw = phi.composition_residual("raw")
    inv, w_inv = phi.composition_residual("inverse")
    assert raw > 0.5 and inv > 0.5
    assert w_raw and w_inv
    infos = {r.check_id: r for r in phi.check_composition()}
    assert infos["phi.coset_composition"].status == "pass"
    assert infos["phi.coset_composition.raw"].status == "info"
    assert "does not hold" in infos["phi.coset_composition.inverse"].detail


def test_f21_has_non_self_inverse_double_cosets(f21):
    pair = f21.pair
    assert any(pair.double_canon(pair.inv(s)) != s for s in f21.algebra.double_cosets())


def test_unknown_variant(s4, phis):
    with pytest.raises(ValueError):
        phis["s4"].phi_left(s4.el("(1 4)"), "sideways")


def test_phi_vector_rejects_left_cosets(s4, phis):
    from heckecalc.cosets import GAMMA, LEFT, CosetVector

    v = CosetVector.from_keys([s4.engine.left(s4.pair.identity)], GAMMA, LEFT)
    with pytest.raises(ValueError):
        phis["s4"].phi_vector(v)


def test_tensor_composition_is_matrix_product(s4):
    rng = np.random.default_rng(11)
    pair = s4.pair

    def rnd():
        return ConvElement(pair, rng.normal(size=24) + 1j * rng.normal(size=24))

    t1, t2 = TensorOperator(rnd(), rnd()), TensorOperator(rnd(), rnd())
    m1 = t1.matrix()
    assert opnorm(m1 - s4.rep.P @ m1 @ s4.rep.P) == 0
    prod = t1.matrix() @ t2.matrix()
    assert prod.shape == (24, 24)
    assert opnorm(t1.adjoint().matrix() - m1.conj().T) < 1e-9


# Gram pairing ---------------------------------------------------------------------


def test_gram_all_transversal_pairs(s4):
    g = gram(s4.rep)
    assert len(g.labels) == 16
    assert g.min_eigenvalue >= -TOL
    assert g.hermitian_residual < TOL
    assert all(r.status == "pass" for r in g.checks(TOL))
    assert np.all(np.diag(g.matrix).real >= -TOL)
    assert np.max(np.abs(np.diag(g.matrix).imag)) < TOL


def test_gram_identity_entry(s4):
    e = s4.pair.identity
    g = gram(s4.rep, [(e, e)])
    assert g.labels == ["()|()"]
    assert abs(g.matrix[0, 0] - 1) < TOL


def test_trace_pairing_matches_entry(s4):
    rep = s4.rep
    s = s4.el("(1 4)")
    x = rep.of_set(rep.bitranslate(s, s))
    g = gram(rep, [(s, s)])
    assert abs(g.matrix[0, 0] - trace_pairing(x, x)) < TOL


def test_gram_csv(s4):
    e, s = s4.pair.identity, s4.el("(1 4)")
    g = gram(s4.rep, parse_pairs(s4.pair, ["()|()", ["(1 4)", "(1 4)"]]))
    buf = io.StringIO()
    g.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",()|(),(1 4)|(1 4)"
    assert lines[1].startswith("()|(),1.0,")
    assert len(lines) == 3
    assert g.labels[1] == f"{s4.pair.format(s)}|{s4.pair.format(s)}" and e == 0


def test_gram_f21_psd(f21):
    g = gram(f21.rep)
    assert g.min_eigenvalue >= -TOL

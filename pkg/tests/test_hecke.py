from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heckecalc.cosets import GAMMA, LEFT, CosetVector
from heckecalc.hecke import (HeckeElement, HeckeError, NotLiftable, RelationInstance,
                             format_hecke, hecke_from_terms, instance_from_dict,
                             instance_to_dict, parse_terms)
from heckecalc.modular import t_p


def brute_product(pair, x, y):
    """c_z = #{g in GxG : g^-1 z in GyG} / |G| for each double coset rep z."""
    gx, gy = pair.double_coset(x), pair.double_coset(y)
    out = {}
    for z in sorted({pair.double_canon(g) for g in pair.elements()}):
        n = sum(1 for g in gx if pair.mul(pair.inv(g), z) in gy)
        if n:
            out[z] = Fraction(n, len(pair.gamma))
    return HeckeElement(out)


def test_star_examples(s4, modular):
    a = s4.algebra
    assert a.star(a.unit()) == a.unit()
    h = a.basis(s4.el("(1 4)"))
    assert a.star(h) == h
    m = modular.algebra
    assert m.star(t_p(m)) == t_p(m)


def test_unit_acts_trivially(s4, modular):
    for setup in (s4, modular):
        v = setup.algebra.coset_vector(setup.pair.identity)
        assert setup.algebra.act_left(setup.algebra.unit(), v) == v


def test_t_p_on_gamma(modular):
    m, eng, pair = modular.algebra, modular.engine, modular.pair
    out = m.act_left(t_p(m), m.coset_vector(pair.identity))
    assert dict(out.coeffs) == {k: 1 for k in eng.decompose_double_right(pair.sigma_p())}
    assert out.mass() == pair.p + 1


def test_s4_action_example(s4):
    a, pair = s4.algebra, s4.pair
    s = s4.el("(1 4)")
    out = a.act_left(a.basis(s), a.coset_vector(s))
    assert out.mass() == 3
    assert out[s4.engine.right(pair.identity)] == 1
    others = [k for k, _ in out if k != s4.engine.right(pair.identity)]
    assert len(others) == 2
    assert all(pair.double_canon(k.rep) == pair.double_canon(s) for k in others)


def test_s4_right_action_mirror(s4):
    a, pair = s4.algebra, s4.pair
    s = s4.el("(1 4)")
    v = CosetVector.from_keys([s4.engine.left(s)], GAMMA, LEFT)
    out = a.act_right(a.basis(s), v)
    assert out.mass() == 3
    assert out[s4.engine.left(pair.identity)] == 1
    e = CosetVector.from_keys([s4.engine.left(pair.identity)], GAMMA, LEFT)
    assert a.act_right(a.unit(), e) == e


def test_s4_square(s4):
    a = s4.algebra
    h = a.basis(s4.el("(1 4)"))
    assert a.mul(h, h) == 3 * a.unit() + 2 * h
    assert a.mul(a.unit(), h) == h


def test_t_p_square(modular):
    m, pair = modular.algebra, modular.pair
    tp = t_p(m)
    assert m.mul(tp, tp) == t_p(m, 2) + (pair.p + 1) * m.unit()


def test_t_p_recursion_k3(modular):
    m, p = modular.algebra, modular.pair.p
    assert m.mul(t_p(m), t_p(m, 2)) == t_p(m, 3) + p * t_p(m)


@pytest.mark.parametrize("name", ["s3", "s4", "f21"])
def test_product_matches_brute_oracle(name, request):
    setup = request.getfixturevalue(name)
    a, pair = setup.algebra, setup.pair
    for x, y in product(a.double_cosets(), repeat=2):
        assert a.mul(a.basis(x), a.basis(y)) == brute_product(pair, x, y)


@pytest.mark.parametrize("name", ["s4", "f21"])
def test_algebra_laws(name, request):
    setup = request.getfixturevalue(name)
    a, pair = setup.algebra, setup.pair
    reps = a.double_cosets()
    basis = {r: a.basis(r) for r in reps}
    for x, y, z in product(reps, repeat=3):
        assert a.mul(a.mul(basis[x], basis[y]), basis[z]) == a.mul(basis[x], a.mul(basis[y], basis[z]))
    for x, y in product(reps, repeat=2):
        xy = a.mul(basis[x], basis[y])
        assert a.star(xy) == a.mul(a.star(basis[y]), a.star(basis[x]))
        assert a.mass(xy) == a.mass(basis[x]) * a.mass(basis[y])
        for g in sorted({pair.canon_right(g) for g in pair.elements()}):
            v = a.coset_vector(g)
            assert a.act_left(xy, v) == a.act_left(basis[x], a.act_left(basis[y], v))
    for x in reps:
        assert a.star(a.star(basis[x])) == basis[x]


def test_mass_of_basis(s4, modular):
    assert s4.algebra.mass(s4.algebra.basis(s4.el("(1 4)"))) == 3
    assert modular.algebra.mass(t_p(modular.algebra, 2)) == (modular.pair.p + 1) * modular.pair.p


coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@given(coeffs, coeffs, coeffs, coeffs)
@settings(max_examples=40, deadline=None)
def test_bilinearity_and_star_random(s4, c1, c2, c3, c4):
    a = s4.algebra
    e, s = s4.pair.identity, s4.el("(1 4)")
    h1 = c1 * a.basis(e) + c2 * a.basis(s)
    h2 = c3 * a.basis(e) + c4 * a.basis(s)
    assert a.mul(h1, h2) == a.mul(h2, h1)  # this algebra is commutative
    assert a.star(a.mul(h1, h2)) == a.mul(a.star(h2), a.star(h1))
    assert a.mass(a.mul(h1, h2)) == a.mass(h1) * a.mass(h2)


def test_noncommutative_pair_involution(f21):
    a = f21.algebra
    reps = a.double_cosets()
    assert any(a.star(a.basis(r)) != a.basis(r) for r in reps)


# relation instances ---------------------------------------------------------


def test_trivial_instance_valid(s4, modular):
    for setup in (s4, modular):
        g = setup.pair.identity
        inst = RelationInstance(((g, g),), ((g, g),))
        assert setup.algebra.verify_relation(inst)


def test_s4_action_instance_valid(s4):
    inst = s4.algebra.action_instance(s4.el("(1 4)"), s4.el("(1 4)"))
    assert len(inst.lhs) == len(inst.rhs) == 3
    for method in ("elements", "cosets"):
        assert s4.algebra.verify_relation(inst, method)


def test_overlap_invalid_with_witness(s4):
    pair = s4.pair
    e, g = pair.identity, s4.el("(1 2)")
    inst = RelationInstance(((e, e), (g, e)), ((e, e),))
    for method in ("elements", "cosets"):
        verdict = s4.algebra.verify_relation(inst, method)
        assert not verdict and "overlap" in verdict.reason
        assert pair.in_gamma(verdict.witness)


def test_unequal_unions_invalid(s4):
    e, s = s4.pair.identity, s4.el("(1 4)")
    inst = RelationInstance(((e, e),), ((s, e),))
    verdict = s4.algebra.verify_relation(inst)
    assert not verdict and verdict.reason == "unions differ"
    assert verdict.witness is not None


def test_unknown_method(s4):
    e = s4.pair.identity
    with pytest.raises(ValueError):
        s4.algebra.verify_relation(RelationInstance(((e, e),), ((e, e),)), "magic")


def test_modular_action_instances_valid(modular):
    m, pair = modular.algebra, modular.pair
    for k in (1, 2):
        for y in (pair.identity, pair.sigma_p(), (1, 1, 0, pair.p)):
            assert m.verify_relation(m.action_instance(pair.sigma_p(k), y))


def test_modular_overlap_detected(modular):
    pair = modular.pair
    e, s = pair.identity, pair.sigma_p()
    inst = RelationInstance(((e, s), (pair.parse("[[1,1],[0,1]]"), s)), ((e, s),))
    assert not modular.algebra.verify_relation(inst)


triple = st.tuples(st.integers(0, 23), st.integers(0, 23))


@given(st.lists(triple, min_size=1, max_size=4), st.lists(triple, min_size=1, max_size=4),
       st.sampled_from(["", "(1 4)", "(2 4)"]))
@settings(max_examples=120, deadline=None)
def test_methods_agree(s4, lhs, rhs, conj):
    eng = s4.engine
    level = eng.level_of(s4.el(conj)) if conj else GAMMA
    inst = RelationInstance(tuple(lhs), tuple(rhs), level)
    v1 = s4.algebra.verify_relation(inst, "elements")
    v2 = s4.algebra.verify_relation(inst, "cosets")
    assert v1.valid == v2.valid
    if not v1.valid:
        assert v1.reason.split()[0] == v2.reason.split()[0] or "differ" in v1.reason + v2.reason


def test_instance_dict_roundtrip(s4):
    inst = s4.algebra.action_instance(s4.el("(1 4)"), s4.el("(1 4)"))
    data = instance_to_dict(s4.pair, inst)
    assert instance_from_dict(s4.pair, s4.engine, data) == inst


# automorphisms --------------------------------------------------------------


def test_identity_automorphism(s4):
    a = s4.algebra
    h = a.basis(s4.el("(1 4)")) + Fraction(1, 2) * a.unit()
    assert a.apply_automorphism(lambda g: g, h) == h


def test_inner_by_gamma_fixes_double_cosets(s4):
    a, pair = s4.algebra, s4.pair
    c = s4.el("(1 2)")

    def theta(g):
        return pair.mul(pair.mul(c, g), pair.inv(c))

    for r in a.double_cosets():
        assert a.apply_automorphism(theta, a.basis(r)) == a.basis(r)
    for x, y in product(a.double_cosets(), repeat=2):
        hx, hy = a.basis(x), a.basis(y)
        assert a.apply_automorphism(theta, a.mul(hx, hy)) == a.mul(
            a.apply_automorphism(theta, hx), a.apply_automorphism(theta, hy))
    v = a.coset_vector(s4.el("(1 4)"))
    assert a.apply_automorphism(theta, v).mass() == 1


def test_conjugation_not_preserving_gamma_raises(s4):
    pair = s4.pair
    c = s4.el("(1 4)")
    with pytest.raises(HeckeError):
        s4.algebra.apply_automorphism(lambda g: pair.mul(pair.mul(c, g), pair.inv(c)),
                                      s4.algebra.unit())


def test_automorphism_on_f21_normalizer(f21):
    """Conjugation by an element of Gamma permutes double cosets and stays multiplicative."""
    a, pair = f21.algebra, f21.pair
    c = pair.gamma_generators()[0]

    def theta(g):
        return pair.mul(pair.mul(c, g), pair.inv(c))

    for x, y in product(a.double_cosets(), repeat=2):
        hx, hy = a.basis(x), a.basis(y)
        assert a.apply_automorphism(theta, a.mul(hx, hy)) == a.mul(
            a.apply_automorphism(theta, hx), a.apply_automorphism(theta, hy))


def test_automorphism_bad_input(s4):
    with pytest.raises(TypeError):
        s4.algebra.apply_automorphism(lambda g: g, 3)


# refinement -----------------------------------------------------------------


def test_split_then_refine_roundtrip(s4):
    a, eng = s4.algebra, s4.engine
    s = s4.el("(1 4)")
    fine = eng.level_of(s)
    inst = a.action_instance(s, s)
    split = a.split_relation(inst, fine)
    assert len(split.lhs) == 3 * len(inst.lhs)
    assert a.verify_relation(split)
    lifted = a.refine_relation(split, GAMMA)
    assert a.verify_relation(lifted)
    assert sorted(eng.left(x, GAMMA) for x, _ in lifted.lhs) == sorted(
        eng.left(x, GAMMA) for x, _ in inst.lhs)


def test_refine_not_liftable(s4):
    """A valid fine instance whose pieces do not fill coarse cosets."""
    a, eng, pair = s4.algebra, s4.engine, s4.pair
    fine = eng.level_of(s4.el("(1 4)"))
    e = pair.identity
    u = [x for x in eng.transversal(fine, LEFT).reps if eng.in_level(GAMMA, x) and x != e]
    inst = RelationInstance(((e, e),), ((e, e),), fine)
    assert a.verify_relation(inst)
    with pytest.raises(NotLiftable):
        a.refine_relation(inst, GAMMA)
    assert u


def test_refine_rejects_invalid(s4):
    fine = s4.engine.level_of(s4.el("(1 4)"))
    e = s4.pair.identity
    inst = RelationInstance(((e, e),), ((s4.el("(1 4)"), e),), fine)
    with pytest.raises(HeckeError):
        s4.algebra.refine_relation(inst, GAMMA)


# text forms -----------------------------------------------------------------


def test_terms_roundtrip(s4):
    terms = parse_terms(s4.pair, ["1/2@(1 4)", "e", "-3@(2 4)"])
    h = hecke_from_terms(s4.algebra, terms)
    assert h == Fraction(-5, 2) * s4.algebra.basis(s4.el("(1 4)")) + s4.algebra.unit()
    assert "[G" in format_hecke(s4.pair, h)
    assert format_hecke(s4.pair, HeckeElement({})) == "0"

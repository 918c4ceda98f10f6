"""Minimal-subtraction Laurent arithmetic, the halting-problem Feynman
rule, and BPHZ forest-formula renormalization."""

import json
import math
import random

import pytest

from hopf_flow.presets import load_preset
from hopf_flow.renorm import (
    BPHZ,
    FeynmanRule,
    LaurentElement,
    bphz,
    feynman_tree,
    laurent_from_json,
    laurent_to_json,
    phi_series_value,
    phisumc_equivalence_check,
    random_laurent,
    rb_T,
    rb_complement,
    rota_baxter_check,
)
from hopf_flow.algebra import AlgebraElement
from hopf_flow.trees import mk_corolla, mk_forest, mk_tree


def halting_demo():
    preset = load_preset("halting-demo")
    return preset["rule"], preset["trees"]


# ---------------------------------------------------------------------------
# Laurent arithmetic


def test_laurent_arithmetic_hand_values():
    x = LaurentElement({2: 3.0, 1: -1.5}, 4.0)
    y = LaurentElement({1: 2.0}, 1.0)
    s = x + y
    assert s.polar == {2: 3.0, 1: 0.5} and s.finite == 5.0
    p = x * y
    # (3w^-2 - 1.5w^-1 + 4)(2w^-1 + 1); positive powers are truncated
    assert p.polar == {3: 6.0, 1: 6.5} and p.finite == 4.0
    d = x - y
    assert d.polar == {2: 3.0, 1: -3.5} and d.finite == 3.0
    n = -x
    assert n.polar == {2: -3.0, 1: 1.5} and n.finite == -4.0
    assert (x * 2.0).polar == {2: 6.0, 1: -3.0}


def test_laurent_eq_and_distance():
    assert LaurentElement({1: 1.0}) == LaurentElement({1: 1.0}, 0.0)
    assert LaurentElement({1: 1.0}) != LaurentElement({2: 1.0})
    x = LaurentElement({2: 3.0, 1: -1.5}, 4.0)
    y = LaurentElement({1: 2.0}, 1.0)
    # sup over shared coefficient slots: |3-0|=3, |-1.5-2|=3.5, |4-1|=3
    assert x.distance(y) == 3.5
    assert x.distance(x) == 0.0


def test_laurent_polar_order_and_predicates():
    assert LaurentElement({2: 3.0, 1: -1.5}, 4.0).polar_order() == 2
    assert LaurentElement.constant(2.0).polar_order() == 0
    assert LaurentElement.constant(2.0).is_finite()
    assert not LaurentElement.pole(1).is_finite()
    assert LaurentElement.zero().is_zero()
    assert LaurentElement.one() == LaurentElement.constant(1.0)


def test_laurent_rejects_nonpositive_pole_orders():
    with pytest.raises(ValueError, match="pole orders"):
        LaurentElement({0: 1.0})
    with pytest.raises(ValueError, match="pole orders"):
        LaurentElement({-1: 1.0})


def test_laurent_json_round_trip_normalizes_signed_zero():
    x = LaurentElement({1: -1.0}, -0.0)
    obj = laurent_to_json(x)
    assert json.dumps(obj, sort_keys=True) == '{"finite": 0.0, "polar": {"1": -1.0}}'
    assert laurent_from_json(obj) == x
    y = LaurentElement({3: 0.25, 1: -2.0}, 7.5)
    assert laurent_from_json(laurent_to_json(y)) == y


# ---------------------------------------------------------------------------
# Rota-Baxter structure of minimal subtraction


def test_projection_splitting():
    x = LaurentElement({2: 3.0, 1: -1.5}, 4.0)
    assert rb_T(x) == LaurentElement({2: 3.0, 1: -1.5})
    assert rb_complement(x) == LaurentElement.constant(4.0)
    assert rb_T(x) + rb_complement(x) == x
    assert rb_T(rb_T(x)) == rb_T(x)
    assert rb_complement(rb_T(x)).is_zero()


def test_rota_baxter_identity_hand_case():
    # weight -1 identity: T(x)T(y) = T(xT(y)) + T(T(x)y) - T(xy)
    x = LaurentElement({1: 1.0}, 2.0)
    y = LaurentElement({1: 1.0}, 3.0)
    lhs = rb_T(x) * rb_T(y)
    rhs = rb_T(x * rb_T(y)) + rb_T(rb_T(x) * y) - rb_T(x * y)
    assert lhs == rhs == LaurentElement({2: 1.0})


def test_rota_baxter_identity_random():
    assert rota_baxter_check(seed=0, trials=100) < 1e-12
    # independent replay of the same identity on a different seed
    rng = random.Random(42)
    for _ in range(50):
        x = random_laurent(rng)
        y = random_laurent(rng)
        lhs = rb_T(x) * rb_T(y)
        rhs = rb_T(x * rb_T(y)) + rb_T(rb_T(x) * y) - rb_T(x * y)
        assert lhs.distance(rhs) < 1e-12


# ---------------------------------------------------------------------------
# the convergent series behind halted charts


def oracle_series(m, terms):
    return math.fsum(1.0 / (1.0 + n * m) ** 2 for n in range(terms))


def test_phi_series_matches_zeta_values():
    # sum 1/(1+n)^2 = pi^2/6, sum 1/(1+2n)^2 = pi^2/8
    assert abs(phi_series_value(1, 1e-7) - math.pi ** 2 / 6) <= 1e-6
    assert abs(phi_series_value(2, 1e-7) - math.pi ** 2 / 8) <= 1e-6


def test_phi_series_matches_partial_sum_oracle():
    # partial sums with the tail bound 1/(m*m*N)
    for m in (1, 2, 3):
        n_terms = 200000
        tail = 1.0 / (m * m * n_terms)
        assert abs(phi_series_value(m, 1e-7) - oracle_series(m, n_terms)) <= tail + 1e-7


def test_phi_series_validation():
    with pytest.raises(ValueError, match="natural"):
        phi_series_value(0, 1e-7)
    with pytest.raises(ValueError, match="eps"):
        phi_series_value(1, 0.0)


# ---------------------------------------------------------------------------
# the Feynman rule


def test_rule_k_args_prefix_with_default_one():
    assert FeynmanRule(k=(4, 2)).k_args(4) == (4, 2, 1, 1)
    assert FeynmanRule().k_args(2) == (1, 1)
    with pytest.raises(ValueError, match="mode"):
        FeynmanRule(mode="banana")
    with pytest.raises(ValueError, match="naturals"):
        FeynmanRule(k=(0,))


def test_flagged_rule_component_values():
    rule, trees = halting_demo()
    phi1 = phi_series_value(1, rule.eps)
    # the diverging minimization runs out of fuel: simple pole
    assert feynman_tree(trees["diverging-mu"], rule) == LaurentElement.pole(1)
    # a total chart halting at 1 contributes the convergent series value
    assert feynman_tree(trees["total-one"], rule) == LaurentElement.constant(phi1)
    # chain = b(diverging, constant flag): product of the two factors
    chain = feynman_tree(trees["chain"], rule)
    assert chain.polar == {1: phi1} and chain.finite == 0.0


def test_flagged_rule_sends_inadmissible_charts_to_one():
    rule, _ = halting_demo()
    # b with an unflagged child has no output chart in flagged mode
    bad = mk_tree("b", (mk_corolla("c"),))
    assert feynman_tree(bad, rule) == LaurentElement.one()


def test_vertex_rule_values():
    rule = FeynmanRule(mode="vertex")
    bp = BPHZ(rule)
    # every sigma totalizes r() to the empty function, the constant 1
    assert bp.phi_tree(mk_corolla("r")) == LaurentElement.one()
    cm = mk_tree("c", (mk_corolla("m"),))
    value = bp.phi_tree(cm)
    assert value.polar_order() == 3 and value.finite == 0.0


def test_vertex_rule_sigma_cap():
    rule = FeynmanRule(mode="vertex", sigma_cap=2)
    big = mk_tree("b", (mk_corolla("c"), mk_corolla("r")))
    with pytest.raises(ValueError, match="exceeds cap"):
        BPHZ(rule).phi_tree(big)


# ---------------------------------------------------------------------------
# BPHZ


def test_counterterm_of_chain_hand_value():
    rule, trees = halting_demo()
    bp = BPHZ(rule)
    phi1 = phi_series_value(1, rule.eps)
    minus = bp.phi_minus_tree(trees["chain"])
    # phi-(chain) = -Phi(1) w^-1 + Phi(1) w^-2
    assert minus.polar == {1: -phi1, 2: phi1}
    assert minus.finite == 0.0
    plus = bp.phi_plus_tree(trees["chain"])
    assert plus.is_finite()


def test_renormalized_values_are_finite():
    rule, trees = halting_demo()
    bp = BPHZ(rule)
    for tree in trees.values():
        assert bp.phi_plus_tree(tree).is_finite()
        assert bp.factorization_residual(tree) <= 1e-9


def test_bogoliubov_factorization_vertex_mode():
    rule = FeynmanRule(mode="vertex")
    bp = BPHZ(rule)
    for tree in (mk_corolla("r"),
                 mk_tree("c", (mk_corolla("m"),)),
                 mk_tree("b", (mk_corolla("m"), mk_corolla("m")))):
        assert bp.factorization_residual(tree) <= 1e-9
        assert bp.phi_plus_tree(tree).is_finite()


def test_counterterm_multiplicative_on_random_products():
    rule, trees = halting_demo()
    bp = BPHZ(rule)
    names = sorted(trees)
    rng = random.Random(5)
    for _ in range(20):
        pick = tuple(trees[rng.choice(names)] for _ in range(rng.randint(2, 3)))
        forest = mk_forest(pick, "nc")
        lhs = bp.phi_minus_forest(forest)
        rhs = LaurentElement.one()
        plus = LaurentElement.one()
        for tree in pick:
            rhs = rhs * bp.phi_minus_tree(tree)
            plus = plus * bp.phi_plus_tree(tree)
        assert lhs.distance(rhs) <= 1e-9
        assert bp.phi_plus_forest(forest).distance(plus) <= 1e-9
        # the direct general recursion agrees with the factored form
        assert bp.phi_minus_forest_direct(forest).distance(lhs) <= 1e-9


def test_bphz_on_algebra_elements():
    rule, trees = halting_demo()
    x = (AlgebraElement.from_tree(trees["chain"], "nc")
         + AlgebraElement.from_tree(trees["diverging-mu"], "nc").scale(2))
    minus, plus = bphz(rule, x)
    bp = BPHZ(rule)
    want_minus = (bp.phi_minus_tree(trees["chain"])
                  + bp.phi_minus_tree(trees["diverging-mu"]) * 2.0)
    assert minus.distance(want_minus) <= 1e-9
    assert plus.is_finite()


def test_flag_sum_equals_coproduct_sum_on_chain():
    rule, trees = halting_demo()
    assert phisumc_equivalence_check(rule, trees["chain"]) is None
    assert phisumc_equivalence_check(rule, trees["diverging-mu"]) is None


def test_flag_sum_check_requires_flagged_mode():
    rule = FeynmanRule(mode="vertex")
    with pytest.raises(ValueError, match="flagged mode"):
        phisumc_equivalence_check(rule, mk_corolla("r"))

"""Free and symmetric algebra elements: exact arithmetic, grading, budget."""

from fractions import Fraction

import pytest

from hopf_flow.algebra import (AlgebraElement, TensorElement,
                               TermBudgetExceeded, element_to_json, power,
                               tensor_to_json)
from hopf_flow.trees import mk_corolla, mk_forest, parse_tree


def elem(text: str, mode: str = "nc") -> AlgebraElement:
    from hopf_flow.trees import parse_element_terms
    x = AlgebraElement.zero(mode)
    for forest, coef in parse_element_terms(text, mode):
        x = x + AlgebraElement.from_forest(forest, coef)
    return x


def test_unit_and_zero():
    one = AlgebraElement.unit("nc")
    zero = AlgebraElement.zero("nc")
    x = elem("b + c")
    assert x * one == x
    assert x + zero == x
    assert zero * x == zero


def test_noncommutative_square_keeps_order():
    x = elem("b + c")
    assert x * x == elem("b*b + b*c + c*b + c*c")


def test_commutative_square_merges_cross_terms():
    x = elem("b + c", "comm")
    assert x * x == elem("b*b + 2 b*c + c*c", "comm")


def test_mode_mismatch_raises():
    with pytest.raises(ValueError):
        elem("b") * elem("b", "comm")


def test_scale_and_fraction_coefficients():
    x = elem("b").scale(Fraction(1, 3))
    y = x + x + x
    assert y == elem("b")
    assert (x - x).is_zero()


def test_power_matches_repeated_product():
    x = elem("b + 1/2 c(r)")
    by_hand = AlgebraElement.unit("nc")
    for _ in range(4):
        by_hand = by_hand * x
    assert power(x, 4) == by_hand
    assert power(x, 0) == AlgebraElement.unit("nc")


def test_homogeneous_part_and_truncate():
    x = elem("b + b*c + b(c,r)")
    assert x.homogeneous_part(1) == elem("b")
    assert x.homogeneous_part(2) == elem("b*c")
    assert x.truncate(2) == elem("b + b*c")
    assert x.homogeneous_part(5).is_zero()


def test_to_commutative_merges_orders():
    x = elem("b*c + c*b + b(c)")
    y = x.to_commutative()
    assert y == elem("2 b*c + b(c)", "comm")


def test_repr_is_sorted_and_stable():
    x = elem("c + b + 2 b(c)")
    assert repr(x) == "b + c + 2 b(c)"
    assert repr(AlgebraElement.zero("nc")) == "0"


def test_tensor_pure_and_multiplication():
    b = mk_forest((mk_corolla("b"),), "nc")
    c = mk_forest((mk_corolla("c"),), "nc")
    t = TensorElement.pure(b, c)
    u = t + t
    assert u.terms[(b, c)] == 2
    prod = t * t
    bb = mk_forest(b.trees + b.trees, "nc")
    cc = mk_forest(c.trees + c.trees, "nc")
    assert prod.terms == {(bb, cc): Fraction(1)}


def test_tensor_map_sides_is_linear():
    b = mk_forest((mk_corolla("b"),), "nc")
    c = mk_forest((mk_corolla("c"),), "nc")
    t = TensorElement.from_terms([(b, c, 2)], "nc")
    doubled = t.map_sides(left_fn=lambda f: AlgebraElement.from_forest(f, 3))
    assert doubled.terms[(b, c)] == 6


def test_json_serializers_are_sorted():
    x = elem("c + b")
    obj = element_to_json(x)
    assert [t["trees"][0]["label"] for t in obj["terms"]] == ["b", "c"]
    b = mk_forest((mk_corolla("b"),), "nc")
    c = mk_forest((mk_corolla("c"),), "nc")
    t = TensorElement.from_terms([(c, b, 1), (b, c, 1)], "nc")
    obj = tensor_to_json(t)
    assert len(obj["terms"]) == 2


def test_term_budget_guard(monkeypatch):
    x = elem("b + c + r + m")
    monkeypatch.setenv("HOPF_FLOW_MAX_TERMS", "10")
    with pytest.raises(TermBudgetExceeded):
        x * x  # 16 distinct two-tree words


def test_repr_of_tensor_element():
    b = mk_forest((mk_corolla("b"),), "nc")
    c = mk_forest((mk_corolla("c"),), "nc")
    t = TensorElement.from_terms([(b, c, 1)], "nc")
    assert repr(t) == "b (x) c"

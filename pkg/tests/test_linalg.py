"""Exact sparse elimination: membership certificates over the rationals."""

from fractions import Fraction

from hopf_flow.linalg import Echelon, solve_linear_membership


def test_membership_in_span():
    g1 = {"x": Fraction(1), "y": Fraction(2)}
    g2 = {"y": Fraction(1), "z": Fraction(1)}
    target = {"x": Fraction(2), "y": Fraction(5), "z": Fraction(1)}
    coefs = solve_linear_membership(target, [g1, g2])
    assert coefs == [Fraction(2), Fraction(1)]


def test_membership_failure_returns_none():
    g1 = {"x": Fraction(1)}
    target = {"x": Fraction(1), "y": Fraction(1)}
    assert solve_linear_membership(target, [g1]) is None


def test_exact_fractions_no_drift():
    g1 = {"x": Fraction(1, 3), "y": Fraction(1, 7)}
    target = {"x": Fraction(5, 3), "y": Fraction(5, 7)}
    assert solve_linear_membership(target, [g1]) == [Fraction(5)]


def test_redundant_generators():
    g1 = {"x": Fraction(1)}
    g2 = {"x": Fraction(2)}
    target = {"x": Fraction(3)}
    coefs = solve_linear_membership(target, [g1, g2])
    assert coefs is not None
    got = {}
    for c, g in zip(coefs, (g1, g2)):
        for k, v in g.items():
            got[k] = got.get(k, Fraction(0)) + c * v
    assert got == target


def test_zero_target_in_empty_span():
    assert solve_linear_membership({}, []) == []


def test_key_fn_orders_pivots():
    g1 = {(2, "b"): Fraction(1), (1, "a"): Fraction(1)}
    target = {(1, "a"): Fraction(2), (2, "b"): Fraction(2)}
    coefs = solve_linear_membership(target, [g1], key_fn=lambda k: k)
    assert coefs == [Fraction(2)]


def test_echelon_reduce_residual():
    ech = Echelon()
    ech.insert({"x": Fraction(1)}, 0)
    residual, combo = ech.reduce({"x": Fraction(4), "y": Fraction(1)})
    assert residual == {"y": Fraction(1)}
    assert combo.get(0) == Fraction(-4)

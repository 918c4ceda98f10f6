"""Dyson-Schwinger solvers: hand-derived components, an independent
fixed-point oracle, series criteria, and the structural checks.

The oracle recomputes X = B+(P(X)) by plain truncated iteration using only
algebra multiplication and the graft operator, then compares component by
component with the graded solver.
"""

from fractions import Fraction

import pytest

from hopf_flow.algebra import AlgebraElement, power
from hopf_flow.dse import (FormalSeries, MultiSeries,
                           bk_coproduct_formula_check, foissy_series_check,
                           hopf_ideal_check, parse_multiseries, parse_series,
                           solve_bk, solve_dse, solve_dse_system,
                           subalgebra_closure_check, verify_bk, verify_dse,
                           verify_dse_system)
from hopf_flow.grafting import BinaryGraft, CorollaGraft, SumGraft
from hopf_flow.presets import load_preset


def elem(text: str, mode: str = "nc") -> AlgebraElement:
    from hopf_flow.trees import parse_element_terms
    x = AlgebraElement.zero(mode)
    for forest, coef in parse_element_terms(text, mode):
        x = x + AlgebraElement.from_forest(forest, coef)
    return x


def truncated_power(x: AlgebraElement, k: int, N: int) -> AlgebraElement:
    out = AlgebraElement.unit(x.mode)
    for _ in range(k):
        out = (out * x).truncate(N)
    return out


def naive_fixed_point(P: FormalSeries, B, N: int) -> AlgebraElement:
    """Iterate X <- trunc(B+(P(X))) from X = 0; stationary after N rounds."""
    x = AlgebraElement.zero("nc")
    for _ in range(N + 1):
        of_x = AlgebraElement.zero("nc")
        top = N if P.support_bound is None else min(N, P.support_bound)
        for k in range(top + 1):
            a_k = P.coefficient(k)
            if a_k:
                of_x = of_x + truncated_power(x, k, N).scale(a_k)
        x = B.apply(of_x.truncate(N)).truncate(N)
    return x


def test_series_coefficient_conventions():
    p = FormalSeries.from_coefficients([2, 1], name="(1+t)^2")
    assert [p.coefficient(k) for k in range(4)] == [1, 2, 1, 0]
    assert FormalSeries.geometric().coefficient(7) == 1
    assert FormalSeries.exponential().coefficient(3) == Fraction(1, 6)
    assert parse_series("geometric").coefficient(5) == 1
    assert parse_series("1,1/2").coefficient(2) == Fraction(1, 2)
    with pytest.raises(ValueError):
        parse_series("no-such-series")


def test_geometric_corolla_components_by_hand():
    sol = solve_dse(FormalSeries.geometric(), CorollaGraft("b"), 4)
    assert sol.component(1) == elem("b")
    assert sol.component(2) == elem("b(b)")
    assert sol.component(3) == elem("b(b,b) + b(b(b))")
    # every planar tree over one label appears once
    assert sol.component(4) == elem(
        "b(b,b,b) + b(b,b(b)) + b(b(b),b) + b(b(b,b)) + b(b(b(b)))")
    assert verify_dse(sol, FormalSeries.geometric(), CorollaGraft("b")) is None


def test_exponential_corolla_components_by_hand():
    sol = solve_dse(FormalSeries.exponential(), CorollaGraft("b"), 3)
    assert sol.component(3) == elem("1/2 b(b,b) + b(b(b))")


def test_solver_matches_naive_fixed_point():
    for series in (FormalSeries.geometric(),
                   FormalSeries.from_coefficients([2, 1], name="(1+t)^2")):
        for graft in (CorollaGraft("b"),
                      SumGraft([CorollaGraft("b"), CorollaGraft("c")])):
            sol = solve_dse(series, graft, 4)
            full = naive_fixed_point(series, graft, 4)
            for n in range(1, 5):
                assert sol.component(n) == full.homogeneous_part(n)


def test_comm_solution_is_projection_of_free_one():
    sol_nc = solve_dse(FormalSeries.geometric(), CorollaGraft("b"), 4, "nc")
    sol_comm = solve_dse(FormalSeries.geometric(), CorollaGraft("b"), 4,
                         "comm")
    for n in range(1, 5):
        assert sol_comm.component(n) == sol_nc.component(n).to_commutative()


def test_verify_flags_perturbed_solution():
    sol = solve_dse(FormalSeries.geometric(), CorollaGraft("b"), 3)
    sol.components[2] = sol.components[2].scale(2)
    assert verify_dse(sol, FormalSeries.geometric(), CorollaGraft("b")) == 2


def test_bk_components_by_hand():
    sol = solve_bk({1: 1}, CorollaGraft("b"), 3)
    assert sol.component(1) == elem("b")
    assert sol.component(2) == elem("2 b(b)")
    # B+((X^2)_2) = B+(2 x_2 + x_1^2)
    assert sol.component(3) == elem("b(b,b) + 4 b(b(b))")
    assert verify_bk(sol, {1: 1}, CorollaGraft("b")) is None


def test_bk_coproduct_formula():
    sol = solve_bk({1: 1}, CorollaGraft("b"), 5)
    assert bk_coproduct_formula_check(sol, 5) is None


def test_bk_binary_preset_displays():
    preset = load_preset("bk-binary")
    sol = solve_dse(preset["P"], preset["B"], 2, preset["mode"])
    x1 = sol.component(1)
    assert x1 == elem("b(#1,#2) + c(#1,#2) + r(#1,#2)")
    x2 = sol.component(2)
    assert len(x2.terms) == 9
    assert set(x2.terms.values()) == {Fraction(2)}
    for forest in x2.terms:
        (tree,) = forest.trees
        child = tree.inputs[0]
        assert child.label in ("b", "c", "r")  # child sits on the first input


def test_foissy_series_criterion():
    assert foissy_series_check(FormalSeries.geometric(), 5) == (1, 1)
    assert foissy_series_check(FormalSeries.exponential(), 5) == (1, 0)
    assert foissy_series_check(parse_series("1+t2"), 5) is None
    # (1 - ab t) P' = a P with P = (1+t)^2: 2(1 - ab t) = a (1+t),
    # so a = 2 and b = -1/2
    square = FormalSeries.from_coefficients([2, 1], name="(1+t)^2")
    assert foissy_series_check(square, 5) == (2, Fraction(-1, 2))
    constant = FormalSeries.from_coefficients([], name="1")
    assert foissy_series_check(constant, 5) == (0, 0)
    with pytest.raises(ValueError):
        foissy_series_check(FormalSeries.geometric(), 2)


def test_subalgebra_closure_matches_criterion():
    for series in (FormalSeries.geometric(), FormalSeries.exponential()):
        sol = solve_dse(series, CorollaGraft("b"), 5)
        assert subalgebra_closure_check(sol) is None
    sol = solve_dse(parse_series("1+t2"), CorollaGraft("b"), 5)
    assert subalgebra_closure_check(sol) == 3


def test_hopf_ideal_check_on_bk_solution():
    sol = solve_bk({1: 1}, CorollaGraft("b"), 5, "comm")
    assert hopf_ideal_check(sol.components, 5, "comm") is None


def test_hopf_ideal_check_fails_for_binary_graft():
    preset = load_preset("bk-binary")
    sol = solve_dse(preset["P"], preset["B"], 3, "comm")
    witness = hopf_ideal_check(sol.components, 3, "comm")
    assert witness is not None
    assert witness.degree == 2


def test_multiseries_parse_and_constant():
    f = parse_multiseries("1 + 2 Xb^2 Xc")
    assert f.coeffs[(0, 0, 0)] == 1
    assert f.coeffs[(2, 1, 0)] == 2
    assert (1, 0, 0) not in f.coeffs
    assert MultiSeries.constant(1).coeffs == {(0, 0, 0): Fraction(1)}


def test_system_solve_and_verify():
    Fb = parse_multiseries("1 + Xb Xc")
    Fc = parse_multiseries("1 + Xr")
    Fr = parse_multiseries("1")
    sols = solve_dse_system(Fb, Fc, Fr, CorollaGraft, 3, "nc")
    assert sols["b"].component(1) == elem("b")
    assert sols["b"].component(2).is_zero()  # Xb*Xc starts in degree 2
    assert sols["b"].component(3) == elem("b(b,c)")
    assert sols["c"].component(2) == elem("c(r)")
    assert sols["r"].component(2).is_zero()
    assert verify_dse_system(sols, Fb, Fc, Fr, CorollaGraft) is None


def test_system_with_binary_grafts():
    Fb = parse_multiseries("1 + Xb")
    Fc = parse_multiseries("1")
    Fr = parse_multiseries("1")
    sols = solve_dse_system(Fb, Fc, Fr, BinaryGraft, 2, "nc")
    assert sols["b"].component(1) == elem("b(#1,#2)")
    assert sols["b"].component(2) == elem("b(b(#1,#2),#1)")

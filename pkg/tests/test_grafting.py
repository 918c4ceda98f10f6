"""Grafting operators and the Hochschild cocycle identity."""

import pytest

from hopf_flow.algebra import AlgebraElement
from hopf_flow.grafting import (BinaryGraft, CorollaGraft, GraftError,
                                SumGraft, cocycle_check, parse_graft)
from hopf_flow.trees import (empty_forest, mk_corolla, mk_forest, parse_tree,
                             render_forest)


def forest(*labels):
    return mk_forest(tuple(mk_corolla(l) for l in labels), "nc")


def as_elem(text):
    return AlgebraElement.from_tree(parse_tree(text))


def test_corolla_graft_attaches_under_new_root():
    op = CorollaGraft("b")
    assert op.apply_forest(empty_forest("nc")) == as_elem("b")
    assert op.apply_forest(forest("c", "r")) == as_elem("b(c,r)")


def test_binary_first_input_padding_and_overflow():
    op = BinaryGraft("r")
    assert op.apply_forest(empty_forest("nc")) == as_elem("r(#1,#2)")
    assert op.apply_forest(forest("c")) == as_elem("r(c,#1)")
    assert op.apply_forest(forest("c", "r")) == as_elem("r(c,r)")
    # three trees: the root consumes only the first, the rest multiply on
    got = op.apply_forest(forest("c", "r", "m"))
    assert len(got.terms) == 1
    (f, coef), = got.terms.items()
    assert render_forest(f) == "r(c,#1)*r*m"
    assert coef == 1


def test_binary_zero_on_mismatch():
    op = BinaryGraft("r", convention="zero-on-mismatch")
    assert op.apply_forest(forest("c")).is_zero()
    assert op.apply_forest(forest("c", "r", "m")).is_zero()
    assert op.apply_forest(forest("c", "r")) == as_elem("r(c,r)")


def test_binary_label_universe_is_restricted():
    with pytest.raises(GraftError):
        BinaryGraft("m")


def test_sum_graft_adds_images():
    op = SumGraft([CorollaGraft("b"), CorollaGraft("c")])
    assert op.apply_forest(forest("r")) == as_elem("b(r)") + as_elem("c(r)")


def test_parse_graft_round_trip():
    for text in ("corolla:b", "binary:r:zero-on-mismatch",
                 "corolla:b+binary:r:first-input"):
        op = parse_graft(text)
        assert parse_graft(repr(op)).apply_forest(forest("c")) == \
            op.apply_forest(forest("c"))
    with pytest.raises(GraftError):
        parse_graft("spiral:b")
    with pytest.raises(GraftError):
        parse_graft("binary:r:never-heard-of-it")


def test_corolla_cocycle_passes_small_degrees():
    for label in ("b", "c", "m"):
        assert cocycle_check(CorollaGraft(label), 3) is None


def test_comm_mode_cocycle_breaks_on_child_order():
    # comm mode sorts forests but keeps children planar, so B+ applied to a
    # sorted forest can disagree with a cut trunk's inherited child order
    witness = cocycle_check(CorollaGraft("c"), 3, "comm")
    assert witness is not None
    assert render_forest(witness.forest) == "c*b(b)"


def test_binary_cocycle_fails_with_disconnected_witness():
    for convention in ("first-input", "zero-on-mismatch"):
        witness = cocycle_check(BinaryGraft("b", convention=convention), 3)
        assert witness is not None
        assert len(witness.forest.trees) >= 2
        assert witness.residual()


def test_apply_is_linear():
    op = CorollaGraft("b")
    x = AlgebraElement.from_forest(forest("c"), 2) + \
        AlgebraElement.from_forest(forest("r"), -1)
    assert op.apply(x) == as_elem("b(c)").scale(2) - as_elem("b(r)")

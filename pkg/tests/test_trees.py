"""Tree and forest kernel: interning, parsing, enumeration, serialization.

Count oracles are closed forms: planar rooted trees with n vertices number
Catalan(n-1) shapes, so L vertex labels give L^n * Catalan(n-1) trees, and
binary trees with n vertices (two slots each) give L^n * Catalan(n) over the
binary alphabet.  Ordered forests follow by composition of the tree counts.
"""

import json
import math

import pytest

from hopf_flow.recfun import parse_recfun, recfun_flag_parser
from hopf_flow.trees import (FREE, Forest, ParseError, PlanarTree,
                             _compositions, canonicalize, empty_forest,
                             enumerate_binary_trees, enumerate_forests,
                             enumerate_trees, forest_product, mk_binary_corolla,
                             mk_corolla, mk_flag, mk_forest, mk_tree,
                             parse_element_terms, parse_forest, parse_tree,
                             render_forest, render_tree, tree_from_json,
                             tree_to_json)


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def test_interning_gives_identical_objects():
    a = mk_tree("b", (mk_corolla("c"), mk_corolla("r")))
    b = parse_tree("b(c,r)")
    assert a is b
    assert mk_flag(None) is FREE
    assert mk_forest((a,), "nc") is mk_forest((b,), "nc")


def test_degree_counts_vertices_not_flags():
    assert mk_corolla("b").degree == 1
    assert mk_binary_corolla("b").degree == 1
    assert parse_tree("b(c,r)").degree == 3


def test_comm_forest_sorts_and_nc_preserves_order():
    b, c = mk_corolla("b"), mk_corolla("c")
    nc = mk_forest((c, b), "nc")
    assert nc.trees == (c, b)
    comm = mk_forest((c, b), "comm")
    assert comm.trees == tuple(sorted((c, b), key=lambda t: t.sort_key()))
    assert canonicalize(nc).trees == (c, b)


def test_forest_product_concatenates_and_checks_mode():
    b, c = mk_corolla("b"), mk_corolla("c")
    fa = mk_forest((b,), "nc")
    fb = mk_forest((c,), "nc")
    assert forest_product(fa, fb).trees == (b, c)
    with pytest.raises(ValueError):
        forest_product(fa, mk_forest((c,), "comm"))


def test_compositions_count_matches_binomial():
    for n in range(1, 8):
        for parts in range(1, n + 1):
            got = list(_compositions(n, parts))
            assert len(got) == math.comb(n - 1, parts - 1)
            assert all(sum(c) == n and min(c) >= 1 for c in got)
            assert len(set(got)) == len(got)


def test_tree_enumeration_counts():
    by_degree = enumerate_trees(4)
    for n in range(1, 5):
        assert len(by_degree[n]) == 4 ** n * catalan(n - 1)
    single = enumerate_trees(3, labels=("b",))
    assert [len(single[n]) for n in (1, 2, 3)] == [1, 1, 2]


def test_binary_tree_enumeration_counts():
    by_degree = enumerate_binary_trees(3)
    for n in range(1, 4):
        assert len(by_degree[n]) == 3 ** n * catalan(n)


def test_forest_enumeration_counts():
    t = {n: 4 ** n * catalan(n - 1) for n in (1, 2, 3)}
    nc = enumerate_forests(3, "nc")
    assert len(nc[1]) == t[1]
    assert len(nc[2]) == t[2] + t[1] ** 2
    assert len(nc[3]) == t[3] + 2 * t[1] * t[2] + t[1] ** 3
    comm = enumerate_forests(3, "comm")
    assert len(comm[1]) == 4
    # multisets: 16 two-vertex trees, plus 4+6 unordered pairs of corollas
    assert len(comm[2]) == t[2] + 10
    assert len(comm[3]) == t[3] + t[1] * t[2] + math.comb(6, 3)


def test_parse_render_round_trip():
    for text in ("b", "b(c,r)", "m(b(c),r(m,m))", "b(#1,#2)",
                 "c(b(#1,#2),#3)"):
        tree = parse_tree(text)
        assert render_tree(tree) == text
        assert parse_tree(render_tree(tree)) is tree


def test_parse_forest_and_element_terms():
    forest = parse_forest("b*c(r)", "nc")
    assert render_forest(forest) == "b*c(r)"
    terms = parse_element_terms("2 b - 1/3 c*r + m", "comm")
    coefs = {render_forest(f): c for f, c in terms}
    assert str(coefs["b"]) == "2"
    assert str(coefs["c*r"]) == "-1/3"
    assert str(coefs["m"]) == "1"


def test_parse_errors():
    for bad in ("", "b(", "b(c,", "x", "b(c))", "b( )"):
        with pytest.raises(ParseError):
            parse_tree(bad)


def test_flagged_parse_round_trip():
    text = "b(in(S),in(comp(P[2,2];S)))"
    tree = parse_tree(text, recfun_flag_parser)
    assert render_tree(tree) == text
    assert parse_tree(render_tree(tree), recfun_flag_parser) is tree


def test_tree_json_round_trip():
    for text in ("b(c,r)", "b(#1,#2)"):
        tree = parse_tree(text)
        blob = json.dumps(tree_to_json(tree))
        assert tree_from_json(json.loads(blob)) is tree
    flagged = parse_tree("m(in(S))", recfun_flag_parser)
    obj = tree_to_json(flagged)
    assert obj["children"][0] == {"flag": True, "fn": "S"}
    back = tree_from_json(obj, recfun_flag_parser)
    assert back is flagged


def test_sort_key_orders_by_degree_first():
    trees = [parse_tree(t) for t in ("b(c,r)", "b", "r(m)", "c")]
    ordered = sorted(trees, key=lambda t: t.sort_key())
    degrees = [t.degree for t in ordered]
    assert degrees == sorted(degrees)


def test_empty_forest_is_unit():
    assert empty_forest("nc").is_empty()
    assert forest_product(empty_forest("nc"),
                          mk_forest((mk_corolla("b"),), "nc")).trees == \
        (mk_corolla("b"),)

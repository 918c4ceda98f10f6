"""Hopf structure on flow-chart algebras: cuts, coproduct, antipode.

The coproduct is by admissible cuts: subsets of internal edges meeting every
root-to-leaf path at most once.  Severing a cut detaches full subtrees (the
pruned forest pi_C, in planar left-to-right order) from the trunk rho_C that
keeps the root.  What a severed edge leaves behind on the trunk depends on
the tree flavour:

  * vertex-labeled trees: the child is removed, the vertex arity shrinks;
  * flag-decorated trees with labeled flags: the child is replaced by an
    input flag carrying the pruned subtree's output function;
  * binary trees with unlabeled flags: the child is replaced by a free flag.

The antipode is computed from its inductive formula on forests directly,
S(f) = -f - sum S(f') f'' over the reduced coproduct; no multiplicative or
anti-multiplicative extension is assumed.
"""

from __future__ import annotations

from fractions import Fraction

from .algebra import AlgebraElement, TensorElement
from .trees import (Forest, PlanarTree, empty_forest, forest_product, mk_flag,
                    mk_forest, mk_tree)
from .recfun import admissible_output

_ONE = Fraction(1)


def _fully_labeled(tree: PlanarTree) -> bool:
    for inp in tree.inputs:
        if isinstance(inp, PlanarTree):
            if not _fully_labeled(inp):
                return False
        elif inp.fn is None:
            return False
    return True


_CUT_CACHE: dict = {}


def _tree_cuts(tree: PlanarTree):
    """All admissible cuts of a tree, the empty cut included.

    Returns a tuple of (pruned_trees, trunk) pairs; pruned_trees lists the
    severed full subtrees in planar order.
    """
    try:
        return _CUT_CACHE[tree]
    except KeyError:
        pass
    labeled = tree.has_flags() and _fully_labeled(tree)
    # per input position: options of (pruned subtrees, trunk entry or None)
    position_options = []
    for inp in tree.inputs:
        if not isinstance(inp, PlanarTree):
            position_options.append((((), inp),))
            continue
        # cutting this edge severs the full child subtree; the stub left on
        # the trunk depends on the tree flavour (see module docstring)
        if tree.has_flags():
            stub = mk_flag(admissible_output(inp) if labeled else None)
            options = [((inp,), stub)]
        else:
            options = [((inp,), None)]
        # or keep the edge and cut (possibly trivially) inside the child
        options.extend(_tree_cuts(inp))
        position_options.append(tuple(options))

    combos = [((), ())]
    for options in position_options:
        combos = [
            (pruned + opt_pruned,
             entries + (opt_entry,) if opt_entry is not None else entries)
            for pruned, entries in combos
            for opt_pruned, opt_entry in options
        ]
    result = tuple((pruned, mk_tree(tree.label, entries))
                   for pruned, entries in combos)
    return _CUT_CACHE.setdefault(tree, result)


def admissible_cuts(tree: PlanarTree):
    """Nonempty admissible cuts as (pruned Forest, trunk PlanarTree) pairs.

    Pruned forests use the noncommutative (planar order) representation;
    the list is sorted by pruned forest, then trunk.
    """
    cuts = [(mk_forest(pruned, "nc"), trunk)
            for pruned, trunk in _tree_cuts(tree) if pruned]
    cuts.sort(key=lambda pair: (pair[0].sort_key(), pair[1].sort_key()))
    return cuts


_TREE_COPRODUCT_CACHE: dict = {}


def tree_coproduct(tree: PlanarTree, mode: str = "nc") -> TensorElement:
    """Delta(t) = t (x) 1 + 1 (x) t + sum of cut terms."""
    key = (tree, mode)
    try:
        return _TREE_COPRODUCT_CACHE[key]
    except KeyError:
        pass
    unit = empty_forest(mode)
    pairs = [(mk_forest((tree,), mode), unit, _ONE)]
    for pruned, trunk in _tree_cuts(tree):
        pairs.append((mk_forest(pruned, mode), mk_forest((trunk,), mode), _ONE))
    result = TensorElement.from_terms(pairs, mode)
    return _TREE_COPRODUCT_CACHE.setdefault(key, result)


_FOREST_COPRODUCT_CACHE: dict = {}


def forest_coproduct(forest: Forest) -> TensorElement:
    """Multiplicative extension Delta(t1 ... tk) = Delta(t1) ... Delta(tk)."""
    try:
        return _FOREST_COPRODUCT_CACHE[forest]
    except KeyError:
        pass
    mode = forest.mode
    result = TensorElement.pure(empty_forest(mode), empty_forest(mode), _ONE)
    for tree in forest.trees:
        result = result * tree_coproduct(tree, mode)
    return _FOREST_COPRODUCT_CACHE.setdefault(forest, result)


def coproduct(x: AlgebraElement) -> TensorElement:
    out = TensorElement.zero(x.mode)
    for forest, coef in x.terms.items():
        out = out + forest_coproduct(forest).scale(coef)
    return out


def counit(x: AlgebraElement) -> Fraction:
    return x.coefficient(empty_forest(x.mode))


def reduced_coproduct(x: AlgebraElement) -> TensorElement:
    """Delta(x) - x (x) 1 - 1 (x) x, defined for zero constant term."""
    if counit(x) != 0:
        raise ValueError("reduced coproduct needs a zero constant term")
    unit = empty_forest(x.mode)
    pairs = []
    for forest, coef in x.terms.items():
        pairs.append((forest, unit, -coef))
        pairs.append((unit, forest, -coef))
    return coproduct(x) + TensorElement.from_terms(pairs, x.mode)


_ANTIPODE_CACHE: dict = {}


def _antipode_forest(forest: Forest) -> AlgebraElement:
    try:
        return _ANTIPODE_CACHE[forest]
    except KeyError:
        pass
    mode = forest.mode
    if forest.is_empty():
        result = AlgebraElement.unit(mode)
        return _ANTIPODE_CACHE.setdefault(forest, result)
    unit = empty_forest(mode)
    acc = {forest: Fraction(-1)}
    for (left, right), coef in forest_coproduct(forest).terms.items():
        if left == forest or right == forest:
            continue  # the f(x)1 and 1(x)f boundary terms
        s_left = _antipode_forest(left)
        for sub, sub_coef in s_left.terms.items():
            key = forest_product(sub, right)
            val = acc.get(key, 0) - coef * sub_coef
            if val:
                acc[key] = val
            elif key in acc:
                del acc[key]
    result = AlgebraElement.from_terms(acc.items(), mode)
    return _ANTIPODE_CACHE.setdefault(forest, result)


def antipode(x: AlgebraElement) -> AlgebraElement:
    out = AlgebraElement.zero(x.mode)
    for forest, coef in x.terms.items():
        out = out + _antipode_forest(forest).scale(coef)
    return out


# ---------------------------------------------------------------------------
# characters and convolution


class Character:
    """Multiplicative map determined by its values on basis trees.

    Values live in any commutative algebra whose elements support + and *
    and absorb Fraction scalars (Fraction itself, floats, Laurent models).
    Evaluation beyond the stored cutoff raises unless a default is given.
    """

    def __init__(self, tree_values: dict, cutoff, mode: str = "nc",
                 one=_ONE, default=None):
        self.tree_values = dict(tree_values)
        self.cutoff = cutoff
        self.mode = mode
        self.one = one
        self.default = default

    def value_on_tree(self, tree: PlanarTree):
        try:
            return self.tree_values[tree]
        except KeyError:
            if self.cutoff is not None and tree.degree > self.cutoff:
                if self.default is None:
                    raise ValueError(
                        "character undefined beyond cutoff %s (tree degree %d)"
                        % (self.cutoff, tree.degree)) from None
                return self.default
            if self.default is None:
                raise ValueError("character undefined on %r" % tree) from None
            return self.default

    def value_on_forest(self, forest: Forest):
        out = self.one
        for tree in forest.trees:
            out = out * self.value_on_tree(tree)
        return out

    def __call__(self, x):
        if isinstance(x, Forest):
            return self.value_on_forest(x)
        if isinstance(x, PlanarTree):
            return self.value_on_tree(x)
        out = None
        for forest, coef in x.terms.items():
            term = coef * self.value_on_forest(forest)
            out = term if out is None else out + term
        return out if out is not None else 0 * self.one


def counit_character(mode: str = "nc", one=_ONE) -> Character:
    """The counit as a character: 1 on the empty forest, 0 on trees."""
    return Character({}, cutoff=None, mode=mode, one=one, default=0 * one)


def convolution(phi, psi, x: AlgebraElement):
    """(phi * psi)(x) = <phi (x) psi, Delta(x)>; phi, psi act on forests."""
    out = None
    for (left, right), coef in coproduct(x).terms.items():
        term = coef * (phi(left) * psi(right))
        out = term if out is None else out + term
    if out is None:
        phi_one = phi(empty_forest(x.mode))
        return 0 * phi_one
    return out


def precompose_antipode(phi):
    """phi o S as a map on forests, for convolution identities."""
    def composed(forest: Forest):
        return phi(_antipode_forest(forest))
    return composed


# ---------------------------------------------------------------------------
# axiom checkers


def _triple_terms(x: TensorElement, expand_left: bool) -> dict:
    out: dict = {}
    for (a, b), coef in x.terms.items():
        inner = forest_coproduct(a if expand_left else b)
        for (u, v), coef2 in inner.terms.items():
            key = (u, v, b) if expand_left else (a, u, v)
            val = out.get(key, 0) + coef * coef2
            if val:
                out[key] = val
            elif key in out:
                del out[key]
    return out


def coassociativity_witness(trees, mode: str = "nc") -> PlanarTree | None:
    for tree in trees:
        delta = tree_coproduct(tree, mode)
        if _triple_terms(delta, True) != _triple_terms(delta, False):
            return tree
    return None


def counit_witness(trees, mode: str = "nc") -> PlanarTree | None:
    """(eps (x) id) Delta = id = (id (x) eps) Delta on basis trees."""
    unit = None
    for tree in trees:
        expected = mk_forest((tree,), mode)
        unit = empty_forest(mode)
        left = AlgebraElement.zero(mode)
        right = AlgebraElement.zero(mode)
        for (a, b), coef in tree_coproduct(tree, mode).terms.items():
            if a == unit:
                left = left + AlgebraElement.from_forest(b, coef)
            if b == unit:
                right = right + AlgebraElement.from_forest(a, coef)
        target = AlgebraElement.from_forest(expected)
        if left != target or right != target:
            return tree
    return None


def antipode_witness(forests) -> Forest | None:
    """m(S (x) id)Delta = u eps = m(id (x) S)Delta on basis forests."""
    for forest in forests:
        mode = forest.mode
        expected = (AlgebraElement.unit(mode) if forest.is_empty()
                    else AlgebraElement.zero(mode))
        left = AlgebraElement.zero(mode)
        right = AlgebraElement.zero(mode)
        for (a, b), coef in forest_coproduct(forest).terms.items():
            left = left + (_antipode_forest(a)
                           * AlgebraElement.from_forest(b)).scale(coef)
            right = right + (AlgebraElement.from_forest(a)
                             * _antipode_forest(b)).scale(coef)
        if left != expected or right != expected:
            return forest
    return None


def grading_witness(trees, mode: str = "nc"):
    """Cut terms of Delta(t) must have bidegrees summing to deg t."""
    for tree in trees:
        for (a, b), _coef in tree_coproduct(tree, mode).terms.items():
            if a.degree + b.degree != tree.degree:
                return tree, a, b
    return None

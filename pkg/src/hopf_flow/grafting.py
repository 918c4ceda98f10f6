"""Grafting operators and the Hochschild 1-cocycle verifier.

Corolla grafting attaches a whole forest under a fresh labeled root and is a
1-cocycle: Delta B+ = (id (x) B+) Delta + B+ (x) 1.  Binary grafting glues
trees onto the two input flags of a fixed two-input corolla; neither of its
conventions satisfies the cocycle identity, and cocycle_check finds the
offending (always disconnected) forests.

Binary conventions:
  * first-input: the empty forest yields the bare corolla, a single tree is
    glued onto the first input, a pair of trees fills input 1 and input 2,
    and with three or more trees only the first is glued while the rest
    remain free multiplicative factors.
  * zero-on-mismatch: only pairs of trees are glued (tree i onto input i);
    every other monomial, the empty forest included, maps to zero.
"""

from __future__ import annotations

from .algebra import AlgebraElement
from .trees import (FREE, Forest, empty_forest, enumerate_binary_trees,
                    enumerate_forests, mk_forest, mk_tree)
from .hopf import forest_coproduct

BINARY_LABELS = ("b", "c", "r")
BINARY_CONVENTIONS = ("first-input", "zero-on-mismatch")


class GraftError(ValueError):
    pass


class GraftOperator:
    """Base: a linear degree-(+1) operator defined forest-by-forest."""

    def apply_forest(self, forest: Forest) -> AlgebraElement:
        raise NotImplementedError

    def apply(self, x: AlgebraElement) -> AlgebraElement:
        out = AlgebraElement.zero(x.mode)
        for forest, coef in x.terms.items():
            out = out + self.apply_forest(forest).scale(coef)
        return out

    def enumerate_inputs(self, max_degree: int, mode: str):
        """Basis forests this operator is meant to act on, by degree."""
        raise NotImplementedError


class CorollaGraft(GraftOperator):
    """B+_delta: new delta-labeled root over the forest's trees."""

    def __init__(self, label: str):
        if label not in ("b", "c", "r", "m"):
            raise GraftError("unknown corolla label %r" % label)
        self.label = label

    def apply_forest(self, forest: Forest) -> AlgebraElement:
        for tree in forest.trees:
            if tree.has_flags():
                raise GraftError(
                    "corolla grafting is defined on vertex-labeled forests")
        grafted = mk_tree(self.label, forest.trees)
        return AlgebraElement.from_forest(mk_forest((grafted,), forest.mode))

    def enumerate_inputs(self, max_degree: int, mode: str):
        return enumerate_forests(max_degree, mode)

    def __repr__(self):
        return "corolla:%s" % self.label


class BinaryGraft(GraftOperator):
    """B+_tau for the two-input corolla tau with the given root label."""

    def __init__(self, label: str, convention: str = "first-input"):
        if label not in BINARY_LABELS:
            raise GraftError("binary grafting labels are b, c, r; got %r" % label)
        if convention not in BINARY_CONVENTIONS:
            raise GraftError("unknown convention %r" % convention)
        self.label = label
        self.convention = convention

    def apply_forest(self, forest: Forest) -> AlgebraElement:
        trees = forest.trees
        mode = forest.mode
        if self.convention == "zero-on-mismatch":
            if len(trees) != 2:
                return AlgebraElement.zero(mode)
            grafted = mk_tree(self.label, (trees[0], trees[1]))
            return AlgebraElement.from_forest(mk_forest((grafted,), mode))
        if not trees:
            grafted = mk_tree(self.label, (FREE, FREE))
        elif len(trees) == 1:
            grafted = mk_tree(self.label, (trees[0], FREE))
        elif len(trees) == 2:
            grafted = mk_tree(self.label, (trees[0], trees[1]))
        else:
            grafted = mk_tree(self.label, (trees[0], FREE))
            return AlgebraElement.from_forest(
                mk_forest((grafted,) + trees[1:], mode))
        return AlgebraElement.from_forest(mk_forest((grafted,), mode))

    def enumerate_inputs(self, max_degree: int, mode: str):
        return enumerate_forests(max_degree, mode,
                                 trees_by_degree=enumerate_binary_trees(max_degree))

    def __repr__(self):
        return "binary:%s:%s" % (self.label, self.convention)


class SumGraft(GraftOperator):
    """Pointwise sum of grafting operators (e.g. summed over labels)."""

    def __init__(self, operators):
        if not operators:
            raise GraftError("SumGraft needs at least one operator")
        self.operators = tuple(operators)

    def apply_forest(self, forest: Forest) -> AlgebraElement:
        out = self.operators[0].apply_forest(forest)
        for op in self.operators[1:]:
            out = out + op.apply_forest(forest)
        return out

    def enumerate_inputs(self, max_degree: int, mode: str):
        return self.operators[0].enumerate_inputs(max_degree, mode)

    def __repr__(self):
        return "+".join(repr(op) for op in self.operators)


def parse_graft(text: str) -> GraftOperator:
    """Operator DSL: 'corolla:b', 'binary:r', 'binary:r:zero-on-mismatch',
    or a '+'-joined sum such as 'binary:b+binary:c+binary:r'."""
    parts = [p.strip() for p in text.split("+")]
    ops = []
    for part in parts:
        fields = part.split(":")
        if fields[0] == "corolla" and len(fields) == 2:
            ops.append(CorollaGraft(fields[1]))
        elif fields[0] == "binary" and len(fields) in (2, 3):
            convention = fields[2] if len(fields) == 3 else "first-input"
            ops.append(BinaryGraft(fields[1], convention))
        else:
            raise GraftError("cannot parse graft operator %r" % part)
    return ops[0] if len(ops) == 1 else SumGraft(ops)


# ---------------------------------------------------------------------------
# the 1-cocycle check


class CocycleWitness:
    __slots__ = ("forest", "lhs", "rhs")

    def __init__(self, forest, lhs, rhs):
        self.forest = forest
        self.lhs = lhs
        self.rhs = rhs

    def residual(self) -> dict:
        out = dict(self.lhs)
        for key, coef in self.rhs.items():
            val = out.get(key, 0) - coef
            if val:
                out[key] = val
            elif key in out:
                del out[key]
        return out

    def __repr__(self):
        return "cocycle failure on %r" % self.forest


def _prune_zeros(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


def cocycle_check(op: GraftOperator, max_degree: int, mode: str = "nc"):
    """Verify Delta~ B+(f) = (id (x) B+) Delta~(f) + f (x) B+(1) on every
    basis forest of degree 1..max_degree; None on pass, else the witness for
    the smallest failing forest (by degree, then canonical order)."""
    unit = empty_forest(mode)
    unit_image = op.apply_forest(unit)
    image_memo: dict = {}

    def image(forest: Forest) -> AlgebraElement:
        try:
            return image_memo[forest]
        except KeyError:
            return image_memo.setdefault(forest, op.apply_forest(forest))

    forests = op.enumerate_inputs(max_degree, mode)
    for degree in range(1, max_degree + 1):
        batch = sorted(forests[degree], key=Forest.sort_key)
        for f in batch:
            lhs: dict = {}
            for g, cg in image(f).terms.items():
                for (a, b), c in forest_coproduct(g).terms.items():
                    if (a == g and b == unit) or (a == unit and b == g):
                        continue
                    key = (a, b)
                    lhs[key] = lhs.get(key, 0) + cg * c
            rhs: dict = {}
            for (a, b), c in forest_coproduct(f).terms.items():
                if (a == f and b == unit) or (a == unit and b == f):
                    continue
                for g, cg in image(b).terms.items():
                    key = (a, g)
                    rhs[key] = rhs.get(key, 0) + c * cg
            for g, cg in unit_image.terms.items():
                key = (f, g)
                rhs[key] = rhs.get(key, 0) + cg
            lhs = _prune_zeros(lhs)
            rhs = _prune_zeros(rhs)
            if lhs != rhs:
                return CocycleWitness(f, lhs, rhs)
    return None

"""Formal linear combinations of forests over exact rationals.

``AlgebraElement`` is a finite Q-linear combination of basis forests of one
mode; ``TensorElement`` a combination of ordered forest pairs.  Both are
immutable value objects; arithmetic never mutates its arguments.

The environment variable HOPF_FLOW_MAX_TERMS (default 500000) bounds the
number of stored terms; exceeding it raises TermBudgetExceeded rather than
silently thrashing.
"""

from __future__ import annotations

import os
from fractions import Fraction

from .trees import Forest, PlanarTree, empty_forest, forest_product, mk_forest

_DEFAULT_MAX_TERMS = 500000


class TermBudgetExceeded(RuntimeError):
    pass


def term_budget() -> int:
    raw = os.environ.get("HOPF_FLOW_MAX_TERMS")
    if raw is None:
        return _DEFAULT_MAX_TERMS
    try:
        return int(raw)
    except ValueError:
        return _DEFAULT_MAX_TERMS


def _check_budget(terms):
    if len(terms) > term_budget():
        raise TermBudgetExceeded(
            "term count %d exceeds HOPF_FLOW_MAX_TERMS=%d"
            % (len(terms), term_budget()))
    return terms


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError("scalar must be an int or Fraction, got %r" % (x,))


class AlgebraElement:
    """Finite sum  sum_f c_f . f  over basis forests of a single mode."""

    __slots__ = ("terms", "mode")

    def __init__(self, terms: dict, mode: str):
        # terms: Forest -> Fraction, zero coefficients dropped by factories
        self.terms = terms
        self.mode = mode

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(mode: str = "nc") -> "AlgebraElement":
        return AlgebraElement({}, mode)

    @staticmethod
    def unit(mode: str = "nc") -> "AlgebraElement":
        return AlgebraElement({empty_forest(mode): Fraction(1)}, mode)

    @staticmethod
    def from_forest(forest: Forest, coef=1) -> "AlgebraElement":
        coef = _as_fraction(coef)
        if coef == 0:
            return AlgebraElement.zero(forest.mode)
        return AlgebraElement({forest: coef}, forest.mode)

    @staticmethod
    def from_tree(tree: PlanarTree, mode: str = "nc", coef=1) -> "AlgebraElement":
        return AlgebraElement.from_forest(mk_forest((tree,), mode), coef)

    @staticmethod
    def from_terms(pairs, mode: str) -> "AlgebraElement":
        terms: dict = {}
        for forest, coef in pairs:
            if forest.mode != mode:
                raise ValueError("forest mode %r does not match element mode %r"
                                 % (forest.mode, mode))
            coef = _as_fraction(coef)
            prev = terms.get(forest)
            nc = coef if prev is None else prev + coef
            if nc:
                terms[forest] = nc
            elif prev is not None:
                del terms[forest]
        return AlgebraElement(_check_budget(terms), mode)

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, forest: Forest) -> Fraction:
        return self.terms.get(forest, _ZERO)

    def support(self):
        return sorted(self.terms, key=Forest.sort_key)

    def max_degree(self) -> int:
        return max((f.degree for f in self.terms), default=0)

    def homogeneous_part(self, degree: int) -> "AlgebraElement":
        return AlgebraElement(
            {f: c for f, c in self.terms.items() if f.degree == degree},
            self.mode)

    def truncate(self, max_degree: int) -> "AlgebraElement":
        return AlgebraElement(
            {f: c for f, c in self.terms.items() if f.degree <= max_degree},
            self.mode)

    def to_commutative(self) -> "AlgebraElement":
        """Image under the quotient map onto the commutative algebra.

        Trees stay planar; only the forest factors are re-sorted, so distinct
        terms may merge.  The map is an algebra and coalgebra morphism.
        """
        if self.mode == "comm":
            return self
        out: dict = {}
        for forest, coef in self.terms.items():
            image = mk_forest(forest.trees, "comm")
            out[image] = out.get(image, Fraction(0)) + coef
        return AlgebraElement(out, "comm")

    # -- arithmetic ----------------------------------------------------------

    def _require_same_mode(self, other: "AlgebraElement"):
        if self.mode != other.mode:
            raise ValueError("mode mismatch: %r vs %r" % (self.mode, other.mode))

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._require_same_mode(other)
        terms = dict(self.terms)
        for f, c in other.terms.items():
            nc = terms.get(f, _ZERO) + c
            if nc:
                terms[f] = nc
            elif f in terms:
                del terms[f]
        return AlgebraElement(_check_budget(terms), self.mode)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + other.scale(-1)

    def scale(self, scalar) -> "AlgebraElement":
        scalar = _as_fraction(scalar)
        if scalar == 0:
            return AlgebraElement.zero(self.mode)
        return AlgebraElement({f: c * scalar for f, c in self.terms.items()},
                              self.mode)

    def __neg__(self) -> "AlgebraElement":
        return self.scale(-1)

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._require_same_mode(other)
        terms: dict = {}
        for f1, c1 in self.terms.items():
            for f2, c2 in other.terms.items():
                f = forest_product(f1, f2)
                nc = terms.get(f, _ZERO) + c1 * c2
                if nc:
                    terms[f] = nc
                elif f in terms:
                    del terms[f]
        return AlgebraElement(_check_budget(terms), self.mode)

    def __eq__(self, other) -> bool:
        return (isinstance(other, AlgebraElement)
                and self.mode == other.mode and self.terms == other.terms)

    def __hash__(self):
        return hash((self.mode, frozenset(self.terms.items())))

    def __repr__(self):
        from .trees import render_terms
        return render_terms(self.terms.items())


_ZERO = Fraction(0)


def power(x: AlgebraElement, k: int) -> AlgebraElement:
    out = AlgebraElement.unit(x.mode)
    for _ in range(k):
        out = out * x
    return out


class TensorElement:
    """Finite sum of  c . (f (x) g)  over ordered pairs of basis forests."""

    __slots__ = ("terms", "mode")

    def __init__(self, terms: dict, mode: str):
        self.terms = terms
        self.mode = mode

    @staticmethod
    def zero(mode: str = "nc") -> "TensorElement":
        return TensorElement({}, mode)

    @staticmethod
    def from_terms(pairs, mode: str) -> "TensorElement":
        terms: dict = {}
        for left, right, coef in pairs:
            key = (left, right)
            c = terms.get(key, _ZERO) + _as_fraction(coef)
            if c:
                terms[key] = c
            elif key in terms:
                del terms[key]
        return TensorElement(_check_budget(terms), mode)

    @staticmethod
    def pure(left: Forest, right: Forest, coef=1) -> "TensorElement":
        if left.mode != right.mode:
            raise ValueError("tensor factors must share a mode")
        coef = _as_fraction(coef)
        if coef == 0:
            return TensorElement.zero(left.mode)
        return TensorElement({(left, right): coef}, left.mode)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "TensorElement") -> "TensorElement":
        if self.mode != other.mode:
            raise ValueError("mode mismatch")
        terms = dict(self.terms)
        for k, c in other.terms.items():
            nc = terms.get(k, _ZERO) + c
            if nc:
                terms[k] = nc
            elif k in terms:
                del terms[k]
        return TensorElement(_check_budget(terms), self.mode)

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        return self + other.scale(-1)

    def scale(self, scalar) -> "TensorElement":
        scalar = _as_fraction(scalar)
        if scalar == 0:
            return TensorElement.zero(self.mode)
        return TensorElement({k: c * scalar for k, c in self.terms.items()},
                             self.mode)

    def __mul__(self, other: "TensorElement") -> "TensorElement":
        # componentwise product (a(x)b)(c(x)d) = ac (x) bd
        if self.mode != other.mode:
            raise ValueError("mode mismatch")
        terms: dict = {}
        for (l1, r1), c1 in self.terms.items():
            for (l2, r2), c2 in other.terms.items():
                key = (forest_product(l1, l2), forest_product(r1, r2))
                nc = terms.get(key, _ZERO) + c1 * c2
                if nc:
                    terms[key] = nc
                elif key in terms:
                    del terms[key]
        return TensorElement(_check_budget(terms), self.mode)

    def multiply_out(self) -> AlgebraElement:
        """Apply the multiplication map m(f (x) g) = f.g."""
        out: dict = {}
        for (left, right), c in self.terms.items():
            f = forest_product(left, right)
            nc = out.get(f, _ZERO) + c
            if nc:
                out[f] = nc
            elif f in out:
                del out[f]
        return AlgebraElement(_check_budget(out), self.mode)

    def map_sides(self, left_fn=None, right_fn=None) -> "TensorElement":
        """Apply linear maps Forest -> AlgebraElement to either side."""
        terms: dict = {}
        for (left, right), c in self.terms.items():
            lefts = left_fn(left).terms.items() if left_fn else ((left, _ONE),)
            rights = right_fn(right).terms.items() if right_fn else ((right, _ONE),)
            for lf, lc in lefts:
                for rf, rc in rights:
                    key = (lf, rf)
                    nc = terms.get(key, _ZERO) + c * lc * rc
                    if nc:
                        terms[key] = nc
                    elif key in terms:
                        del terms[key]
        return TensorElement(_check_budget(terms), self.mode)

    def __eq__(self, other) -> bool:
        return (isinstance(other, TensorElement)
                and self.mode == other.mode and self.terms == other.terms)

    def __hash__(self):
        return hash((self.mode, frozenset(self.terms.items())))

    def __repr__(self):
        from .trees import render_forest
        if not self.terms:
            return "0"
        keys = sorted(self.terms, key=lambda lr: (lr[0].sort_key(), lr[1].sort_key()))
        chunks = []
        for left, right in keys:
            c = self.terms[(left, right)]
            body = "%s (x) %s" % (render_forest(left), render_forest(right))
            if c != 1:
                body = "%s %s" % (c, body)
            chunks.append(body)
        return " + ".join(chunks)


_ONE = Fraction(1)


def element_to_json(x: AlgebraElement) -> dict:
    from .trees import tree_to_json
    terms = []
    for forest in sorted(x.terms, key=lambda f: f.sort_key()):
        terms.append({"coef": str(x.terms[forest]),
                      "trees": [tree_to_json(t) for t in forest.trees]})
    return {"mode": x.mode, "terms": terms}


def tensor_to_json(x: TensorElement) -> dict:
    from .trees import tree_to_json
    keys = sorted(x.terms, key=lambda lr: (lr[0].sort_key(), lr[1].sort_key()))
    terms = []
    for left, right in keys:
        terms.append({"coef": str(x.terms[(left, right)]),
                      "left": [tree_to_json(t) for t in left.trees],
                      "right": [tree_to_json(t) for t in right.trees]})
    return {"mode": x.mode, "terms": terms}

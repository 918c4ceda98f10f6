"""Rota-Baxter target algebra, halting Feynman rules, BPHZ renormalization.

The target algebra models functions of z near z = 1 that arise from flow
chart evaluation: finite linear combinations of poles w^-k (w = 1 - z) plus
a finite part collapsed to its value at z = 1.  The projection T onto the
polar span is a Rota-Baxter operator of weight -1, which drives the BPHZ
splitting phi = (phi_minus o S) * phi_plus.

A Feynman rule sends a flow chart to the product over output components of
  - the geometric-series pole w^-1 when the component diverges within fuel,
  - the convergent value sum_{n>=0} 1/(1+n*m)^2 at z = 1 when it halts with
    value m (partial sums with tail bound 1/(m^2 N)),
  - the constant 1 for the empty function.
Divergence is fuel-relative throughout: exhausting the budget is reported as
a pole, never as certified non-termination.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from numbers import Real

import numpy as np

from .algebra import AlgebraElement
from .hopf import admissible_cuts, antipode, forest_coproduct, tree_coproduct
from .recfun import (AdmissibilityFailure, BracketNode, CompNode, EmptyNode,
                     Halted, admissible_check, comp, empty, evaluate_cached,
                     flowchart_output_vertexmode, sigma_assignments)
from .trees import Forest, PlanarTree, mk_forest


class LaurentElement:
    """span{w^-k : k >= 1} plus a constant; w = 1 - z."""

    __slots__ = ("polar", "finite")

    def __init__(self, polar=None, finite=0.0):
        clean = {}
        for k, c in (polar or {}).items():
            if not (isinstance(k, int) and k >= 1):
                raise ValueError("pole orders must be integers >= 1, got %r" % (k,))
            c = float(c)
            if c != 0.0:
                clean[k] = c
        self.polar = clean
        self.finite = float(finite)

    @classmethod
    def zero(cls) -> "LaurentElement":
        return cls({}, 0.0)

    @classmethod
    def one(cls) -> "LaurentElement":
        return cls({}, 1.0)

    @classmethod
    def constant(cls, value) -> "LaurentElement":
        return cls({}, value)

    @classmethod
    def pole(cls, order: int, coef=1.0) -> "LaurentElement":
        return cls({order: coef}, 0.0)

    def is_zero(self) -> bool:
        return not self.polar and self.finite == 0.0

    def is_finite(self) -> bool:
        return not self.polar

    def polar_order(self) -> int:
        return max(self.polar, default=0)

    def __add__(self, other: "LaurentElement") -> "LaurentElement":
        out = dict(self.polar)
        for k, c in other.polar.items():
            out[k] = out.get(k, 0.0) + c
        return LaurentElement(out, self.finite + other.finite)

    def __neg__(self) -> "LaurentElement":
        return LaurentElement({k: -c for k, c in self.polar.items()}, -self.finite)

    def __sub__(self, other: "LaurentElement") -> "LaurentElement":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (Real, Fraction)):
            s = float(other)
            return LaurentElement({k: c * s for k, c in self.polar.items()},
                                  self.finite * s)
        out = {}
        for i, a in self.polar.items():
            for j, b in other.polar.items():
                out[i + j] = out.get(i + j, 0.0) + a * b
            out[i] = out.get(i, 0.0) + a * other.finite
        for j, b in other.polar.items():
            out[j] = out.get(j, 0.0) + self.finite * b
        return LaurentElement(out, self.finite * other.finite)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __eq__(self, other):
        return (isinstance(other, LaurentElement)
                and self.polar == other.polar and self.finite == other.finite)

    def __hash__(self):
        return hash((frozenset(self.polar.items()), self.finite))

    def distance(self, other: "LaurentElement") -> float:
        keys = set(self.polar) | set(other.polar)
        gap = abs(self.finite - other.finite)
        for k in keys:
            gap = max(gap, abs(self.polar.get(k, 0.0) - other.polar.get(k, 0.0)))
        return gap

    def __repr__(self):
        chunks = []
        for k in sorted(self.polar, reverse=True):
            chunks.append("%g*w^-%d" % (self.polar[k], k))
        if self.finite or not chunks:
            chunks.append("%g" % self.finite)
        return " + ".join(chunks)


def laurent_arith(x: LaurentElement, y: LaurentElement, op: str) -> LaurentElement:
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    raise ValueError("op must be add or mul, got %r" % (op,))


def rb_T(x: LaurentElement) -> LaurentElement:
    """Projection onto the polar span; Rota-Baxter of weight -1."""
    return LaurentElement(x.polar, 0.0)


def rb_complement(x: LaurentElement) -> LaurentElement:
    """(1 - T): the finite part, with the poles removed exactly."""
    return LaurentElement({}, x.finite)


def laurent_to_json(x: LaurentElement) -> dict:
    # + 0.0 normalizes IEEE signed zeros so output is byte-stable.
    return {"polar": {str(k): x.polar[k] + 0.0 for k in sorted(x.polar)},
            "finite": x.finite + 0.0}


def laurent_from_json(obj: dict) -> LaurentElement:
    return LaurentElement({int(k): c for k, c in obj.get("polar", {}).items()},
                          obj.get("finite", 0.0))


def random_laurent(rng: random.Random, max_order: int = 3) -> LaurentElement:
    polar = {}
    for k in range(1, max_order + 1):
        if rng.random() < 0.6:
            polar[k] = rng.uniform(-2.0, 2.0)
    return LaurentElement(polar, rng.uniform(-2.0, 2.0))


def rota_baxter_check(seed: int = 0, trials: int = 100) -> float:
    """Largest residual of T(x)T(y) = T(xT(y)) + T(T(x)y) - T(xy)."""
    rng = random.Random(seed)
    worst = 0.0
    for _ in range(trials):
        x = random_laurent(rng)
        y = random_laurent(rng)
        lhs = rb_T(x) * rb_T(y)
        rhs = rb_T(x * rb_T(y)) + rb_T(rb_T(x) * y) - rb_T(x * y)
        worst = max(worst, lhs.distance(rhs))
    return worst


# ---------------------------------------------------------------------------
# the convergent series value at z = 1

_SERIES_CACHE: dict = {}

_CHUNK = 1 << 20


def phi_series_value(m: int, eps: float) -> float:
    """sum_{n>=0} 1/(1+n*m)^2 by partial sums; the tail after N terms is
    below 1/(m*m*N) <= eps."""
    if m < 1:
        raise ValueError("the halted value must be a natural >= 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    key = (m, eps)
    try:
        return _SERIES_CACHE[key]
    except KeyError:
        pass
    N = int(math.ceil(1.0 / (m * m * eps)))
    total = 0.0
    start = 0
    while start <= N:
        stop = min(start + _CHUNK, N + 1)
        n = np.arange(start, stop, dtype=np.float64)
        total += float(np.sum(1.0 / (1.0 + n * m) ** 2))
        start = stop
    return _SERIES_CACHE.setdefault(key, total)


# ---------------------------------------------------------------------------
# Feynman rules


class FeynmanRule:
    """Evaluation parameters for the halting-problem Feynman rule.

    k is a finitely supported point of N^infinity, stored as a prefix with
    default entry 1 beyond it.  In vertex mode each tree is averaged as a
    product over capped basic-input assignments sigma.
    """

    __slots__ = ("mode", "k", "fuel", "eps", "sigma_cap")

    def __init__(self, mode: str = "flagged", k=(), fuel: int = 100000,
                 eps: float = 1e-7, sigma_cap: int = 729):
        if mode not in ("flagged", "vertex"):
            raise ValueError("mode must be flagged or vertex, got %r" % (mode,))
        k = tuple(int(v) for v in k)
        if any(v < 1 for v in k):
            raise ValueError("k entries must be naturals >= 1")
        if fuel < 0:
            raise ValueError("fuel must be >= 0")
        self.mode = mode
        self.k = k
        self.fuel = fuel
        self.eps = float(eps)
        self.sigma_cap = sigma_cap

    def k_args(self, arity: int):
        return tuple(self.k[i] if i < len(self.k) else 1 for i in range(arity))

    def __repr__(self):
        return ("FeynmanRule(mode=%r, k=%r, fuel=%d, eps=%g, sigma_cap=%d)"
                % (self.mode, self.k, self.fuel, self.eps, self.sigma_cap))


def output_components(expr):
    """Single-output component functions, in output order."""
    if isinstance(expr, BracketNode):
        return [c for part in expr.parts for c in output_components(part)]
    if isinstance(expr, EmptyNode) and expr.sig[1] > 1:
        return [empty(expr.sig[0], 1)] * expr.sig[1]
    if isinstance(expr, CompNode) and expr.sig[1] > 1:
        return [comp(expr.first, c) for c in output_components(expr.second)]
    return [expr]


def _component_factor(expr, rule: FeynmanRule) -> LaurentElement:
    if isinstance(expr, EmptyNode):
        # the empty function is mapped to the constant function 1
        return LaurentElement.one()
    args = rule.k_args(expr.sig[0])
    result = evaluate_cached(expr, args, rule.fuel)
    if isinstance(result, Halted):
        return LaurentElement.constant(phi_series_value(result.values[0], rule.eps))
    return LaurentElement.pole(1)


def feynman_flagged(tree: PlanarTree, rule: FeynmanRule) -> LaurentElement:
    """Product over output components of the chart's pole/value factors;
    inadmissible charts carry the empty function, hence the constant 1."""
    output = admissible_check(tree)
    if isinstance(output, AdmissibilityFailure):
        return LaurentElement.one()
    value = LaurentElement.one()
    for part in output_components(output):
        value = value * _component_factor(part, rule)
    return value


def feynman_vertex(tree: PlanarTree, rule: FeynmanRule) -> LaurentElement:
    """Product over capped basic-input assignments of the flagged factors."""
    value = LaurentElement.one()
    for sigma in sigma_assignments(tree, rule.sigma_cap):
        output = flowchart_output_vertexmode(tree, sigma)
        for part in output_components(output):
            value = value * _component_factor(part, rule)
    return value


def feynman_tree(tree: PlanarTree, rule: FeynmanRule) -> LaurentElement:
    if rule.mode == "vertex":
        return feynman_vertex(tree, rule)
    return feynman_flagged(tree, rule)


def feynman_forest(forest: Forest, rule: FeynmanRule) -> LaurentElement:
    value = LaurentElement.one()
    for tree in forest.trees:
        value = value * feynman_tree(tree, rule)
    return value


def feynman_element(x: AlgebraElement, rule: FeynmanRule) -> LaurentElement:
    value = LaurentElement.zero()
    for forest, coef in x.terms.items():
        value = value + feynman_forest(forest, rule) * coef
    return value


# ---------------------------------------------------------------------------
# BPHZ


class BPHZ:
    """Memoized BPHZ splitting of the Feynman rule character.

    phi_minus(t) = -T(R(t)), phi_plus(t) = (1-T)(R(t)), with the prepared
    value R(t) = phi(t) + sum phi_minus(pruned) phi(trunk) over nonempty
    admissible cuts; both extend multiplicatively to forests and linearly.
    """

    __slots__ = ("rule", "_phi", "_minus", "_minus_direct")

    def __init__(self, rule: FeynmanRule):
        self.rule = rule
        self._phi = {}
        self._minus = {}
        self._minus_direct = {}

    # -- phi

    def phi_tree(self, tree: PlanarTree) -> LaurentElement:
        try:
            return self._phi[tree]
        except KeyError:
            return self._phi.setdefault(tree, feynman_tree(tree, self.rule))

    def phi_forest(self, forest: Forest) -> LaurentElement:
        value = LaurentElement.one()
        for tree in forest.trees:
            value = value * self.phi_tree(tree)
        return value

    def phi_element(self, x: AlgebraElement) -> LaurentElement:
        value = LaurentElement.zero()
        for forest, coef in x.terms.items():
            value = value + self.phi_forest(forest) * coef
        return value

    # -- the Bogoliubov preparation

    def prepared(self, tree: PlanarTree) -> LaurentElement:
        value = self.phi_tree(tree)
        for pruned, trunk in admissible_cuts(tree):
            value = value + self.phi_minus_forest(pruned) * self.phi_tree(trunk)
        return value

    def phi_minus_tree(self, tree: PlanarTree) -> LaurentElement:
        try:
            return self._minus[tree]
        except KeyError:
            value = -rb_T(self.prepared(tree))
            return self._minus.setdefault(tree, value)

    def phi_plus_tree(self, tree: PlanarTree) -> LaurentElement:
        return rb_complement(self.prepared(tree))

    def phi_minus_forest(self, forest: Forest) -> LaurentElement:
        value = LaurentElement.one()
        for tree in forest.trees:
            value = value * self.phi_minus_tree(tree)
        return value

    def phi_plus_forest(self, forest: Forest) -> LaurentElement:
        value = LaurentElement.one()
        for tree in forest.trees:
            value = value * self.phi_plus_tree(tree)
        return value

    def phi_minus_element(self, x: AlgebraElement) -> LaurentElement:
        value = LaurentElement.zero()
        for forest, coef in x.terms.items():
            value = value + self.phi_minus_forest(forest) * coef
        return value

    def phi_plus_element(self, x: AlgebraElement) -> LaurentElement:
        value = LaurentElement.zero()
        for forest, coef in x.terms.items():
            value = value + self.phi_plus_forest(forest) * coef
        return value

    def phi_minus_forest_direct(self, forest: Forest) -> LaurentElement:
        """The counterterm recursion applied to the forest as a whole, not
        assuming multiplicativity; agreement with the per-tree product is
        the Rota-Baxter weight -1 property in action."""
        if not forest.trees:
            return LaurentElement.one()
        try:
            return self._minus_direct[forest]
        except KeyError:
            pass
        value = self.phi_forest(forest)
        for (left, right), coef in forest_coproduct(forest).terms.items():
            if not left.trees or not right.trees:
                continue
            value = value + (self.phi_minus_forest_direct(left)
                             * self.phi_forest(right)) * coef
        value = -rb_T(value)
        return self._minus_direct.setdefault(forest, value)

    def factorization_residual(self, tree: PlanarTree) -> float:
        """Distance between phi(t) and ((phi_minus o S) * phi_plus)(t)."""
        total = LaurentElement.zero()
        for (left, right), coef in tree_coproduct(tree, "nc").terms.items():
            s_left = antipode(AlgebraElement({left: Fraction(1)}, "nc"))
            total = total + (self.phi_minus_element(s_left)
                             * self.phi_plus_forest(right)) * coef
        return total.distance(self.phi_tree(tree))


def bphz(rule: FeynmanRule, x: AlgebraElement):
    """(phi_minus(x), phi_plus(x)) for a linear combination of forests."""
    engine = BPHZ(rule)
    return engine.phi_minus_element(x), engine.phi_plus_element(x)


def phisumc_equivalence_check(rule: FeynmanRule, tree: PlanarTree,
                              tol: float = 1e-9):
    """Counterterm via the general cut formula versus the factored form
    -T(phi(t) (1 + sum phi_minus(pruned))); the factored form uses that a
    fully labeled trunk keeps the root output function.  None on agreement
    within tol, else the (general, factored) pair."""
    if rule.mode != "flagged":
        raise ValueError("the factored form needs flagged mode")
    engine = BPHZ(rule)
    general = engine.phi_minus_tree(tree)
    pruned_sum = LaurentElement.zero()
    for pruned, _trunk in admissible_cuts(tree):
        pruned_sum = pruned_sum + engine.phi_minus_forest(pruned)
    factored = -rb_T(engine.phi_tree(tree)
                     * (LaurentElement.one() + pruned_sum))
    if general.distance(factored) <= tol:
        return None
    return (general, factored)

"""Combinatorial Dyson-Schwinger equations in the flow-chart Hopf algebra.

A single equation X = B+(P(X)) with P a formal power series (a0 = 1) is
solved degree by degree:

    x_1 = B+(1),   x_{n+1} = sum_k a_k sum_{j1+...+jk = n} a_k-free
                              B+(x_{j1} ... x_{jk}),

and verified by substituting back.  The Bergbauer-Kreimer form
X = 1 + sum_n c_n B+(X^{n+1}) is graded by reading off the degree-n part of
the right side.  Systems X_delta = B+_delta(F_delta(X_b, X_c, X_r)) are
solved by degree-wise substitution.  The Foissy criterion identifies the
series P with (1 - alpha beta t) P'(t) = alpha P(t); the subalgebra and
Hopf-ideal checks decide coproduct-closure questions by exact linear
membership over the forest basis.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial

from .algebra import AlgebraElement, TensorElement, power
from .grafting import GraftOperator
from .hopf import coproduct
from .linalg import solve_linear_membership
from .trees import empty_forest, enumerate_forests

_ZERO = Fraction(0)
_ONE = Fraction(1)


class FormalSeries:
    """P(t) = sum a_k t^k with a0 = 1, given by a coefficient rule."""

    def __init__(self, rule, name: str = None, support_bound: int = None):
        self._rule = rule
        self.name = name
        self.support_bound = support_bound  # a_k = 0 for k > bound, if known

    def coefficient(self, k: int) -> Fraction:
        if k == 0:
            return _ONE
        if self.support_bound is not None and k > self.support_bound:
            return _ZERO
        return Fraction(self._rule(k))

    def is_constant_through(self, depth: int) -> bool:
        return all(self.coefficient(k) == 0 for k in range(1, depth + 1))

    @classmethod
    def from_coefficients(cls, coeffs, name: str = None) -> "FormalSeries":
        """coeffs lists a_1, a_2, ... (a_0 = 1 is implicit)."""
        table = {k + 1: Fraction(a) for k, a in enumerate(coeffs)}
        return cls(lambda k: table.get(k, _ZERO), name=name,
                   support_bound=len(table))

    @classmethod
    def geometric(cls) -> "FormalSeries":
        return cls(lambda k: _ONE, name="geometric")

    @classmethod
    def exponential(cls) -> "FormalSeries":
        return cls(lambda k: Fraction(1, factorial(k)), name="exp")

    def __repr__(self):
        return "FormalSeries(%s)" % (self.name or "<rule>")


SERIES_PRESETS = {
    "geometric": FormalSeries.geometric,
    "exp": FormalSeries.exponential,
    "1+t": lambda: FormalSeries.from_coefficients([1], name="1+t"),
    "1+t2": lambda: FormalSeries.from_coefficients([0, 1], name="1+t2"),
}


def parse_series(text: str) -> FormalSeries:
    """A preset name, or comma-separated rationals a_1, a_2, ..."""
    text = text.strip()
    if text in SERIES_PRESETS:
        return SERIES_PRESETS[text]()
    coeffs = [Fraction(part.strip()) for part in text.split(",") if part.strip()]
    return FormalSeries.from_coefficients(coeffs, name=text)


class GradedSolution:
    """Homogeneous components of a truncated series solution."""

    __slots__ = ("components", "cutoff", "mode")

    def __init__(self, components: dict, cutoff: int, mode: str):
        self.components = dict(components)
        self.cutoff = cutoff
        self.mode = mode

    def component(self, n: int) -> AlgebraElement:
        if n < 0 or n > self.cutoff:
            raise ValueError("component %d beyond cutoff %d" % (n, self.cutoff))
        return self.components.get(n, AlgebraElement.zero(self.mode))

    def partial_sum(self, through: int = None) -> AlgebraElement:
        through = self.cutoff if through is None else through
        acc = AlgebraElement.zero(self.mode)
        for n, x in self.components.items():
            if n <= through:
                acc = acc + x
        return acc

    def to_commutative(self) -> "GradedSolution":
        if self.mode == "comm":
            return self
        comps = {n: x.to_commutative() for n, x in self.components.items()}
        return GradedSolution(comps, self.cutoff, "comm")

    def __repr__(self):
        lines = []
        for n in sorted(self.components):
            lines.append("x_%d = %r" % (n, self.components[n]))
        return "\n".join(lines) or "0"


def _power_part(base: AlgebraElement, k: int, degree: int) -> AlgebraElement:
    """Degree-homogeneous part of base**k."""
    return power(base.truncate(degree), k).homogeneous_part(degree)


def solve_dse(P: FormalSeries, B: GraftOperator, N: int,
              mode: str = "nc") -> GradedSolution:
    """Truncated solution of X = B+(P(X)), starting from x_1 = B+(1).

    Grafting is defined on planar representatives, so it does not descend to
    the commutative quotient; the commutative solution is by definition the
    image of the free one under the quotient map.
    """
    if N < 1:
        raise ValueError("cutoff must be >= 1")
    if mode == "comm":
        return solve_dse(P, B, N, "nc").to_commutative()
    comps = {1: B.apply(AlgebraElement.unit(mode))}
    for n in range(1, N):
        below = AlgebraElement.zero(mode)
        for d in range(1, n + 1):
            below = below + comps[d]
        acc = AlgebraElement.zero(mode)
        for k in range(1, n + 1):
            a_k = P.coefficient(k)
            if a_k == 0:
                continue
            part = _power_part(below, k, n)
            if not part.is_zero():
                acc = acc + B.apply(part).scale(a_k)
        comps[n + 1] = acc
    return GradedSolution(comps, N, mode)


def verify_dse(sol: GradedSolution, P: FormalSeries, B: GraftOperator,
               N: int = None):
    """None on pass, else the first degree where X != B+(P(X)).

    Commutative solutions are checked against the projected free solution,
    since substitute-back needs planar representatives.
    """
    N = sol.cutoff if N is None else N
    if sol.mode == "comm":
        ref = solve_dse(P, B, N, "comm")
        for n in range(1, N + 1):
            if sol.component(n) != ref.component(n):
                return n
        return None
    full = sol.partial_sum(N)
    for n in range(1, N + 1):
        rhs = AlgebraElement.zero(sol.mode)
        for k in range(0, n):
            a_k = P.coefficient(k)
            if a_k == 0:
                continue
            part = _power_part(full, k, n - 1)
            if not part.is_zero():
                rhs = rhs + B.apply(part).scale(a_k)
        if rhs.homogeneous_part(n) != sol.component(n):
            return n
    return None


def solve_bk(c: dict, B: GraftOperator, N: int, mode: str = "nc") -> GradedSolution:
    """X = 1 + sum_n c_n B+(X^{n+1}), graded by coupling powers: the
    degree-n component reads off the degree-(n-1) part under B+.

    Commutative solutions are projections of the free one, as in solve_dse.
    """
    if mode == "comm":
        return solve_bk(c, B, N, "nc").to_commutative()
    comps = {0: AlgebraElement.unit(mode)}
    couplings = {int(k): Fraction(v) for k, v in c.items() if v}
    for n in range(1, N + 1):
        below = AlgebraElement.zero(mode)
        for d in range(0, n):
            below = below + comps[d]
        acc = AlgebraElement.zero(mode)
        for k, c_k in couplings.items():
            part = _power_part(below, k + 1, n - 1)
            if not part.is_zero():
                acc = acc + B.apply(part).scale(c_k)
        comps[n] = acc
    return GradedSolution(comps, N, mode)


def verify_bk(sol: GradedSolution, c: dict, B: GraftOperator, N: int = None):
    N = sol.cutoff if N is None else N
    if sol.mode == "comm":
        ref = solve_bk(c, B, N, "comm")
        for n in range(1, N + 1):
            if sol.component(n) != ref.component(n):
                return n
        return None
    full = sol.partial_sum(N)
    for n in range(1, N + 1):
        rhs = AlgebraElement.zero(sol.mode)
        for k, c_k in c.items():
            if not c_k:
                continue
            part = _power_part(full, int(k) + 1, n - 1)
            if not part.is_zero():
                rhs = rhs + B.apply(part).scale(Fraction(c_k))
        if rhs.homogeneous_part(n) != sol.component(n):
            return n
    return None


class MultiSeries:
    """F(X) = sum a_{k1,k2,k3} X_b^{k1} X_c^{k2} X_r^{k3}."""

    def __init__(self, coeffs: dict, name: str = None):
        self.coeffs = {tuple(key): Fraction(val)
                       for key, val in coeffs.items() if val}
        self.name = name

    @classmethod
    def constant(cls, value=1) -> "MultiSeries":
        return cls({(0, 0, 0): Fraction(value)}, name=str(value))

    def __repr__(self):
        return "MultiSeries(%s)" % (self.name or self.coeffs)


_VARIABLE_SLOTS = {"Xb": 0, "Xc": 1, "Xr": 2}


def parse_multiseries(text: str) -> MultiSeries:
    """Mini-DSL: terms joined by '+', each an optional rational coefficient
    followed by factors Xb, Xc, Xr with optional ^k, e.g. '1 + 2 Xb^2 Xc'."""
    coeffs: dict = {}
    for raw_term in text.split("+"):
        term = raw_term.strip()
        if not term:
            raise ValueError("empty term in multiseries %r" % text)
        tokens = term.replace("*", " ").split()
        exponents = [0, 0, 0]
        coef = None
        for token in tokens:
            base, _, exp = token.partition("^")
            if base in _VARIABLE_SLOTS:
                exponents[_VARIABLE_SLOTS[base]] += int(exp) if exp else 1
            else:
                if coef is not None:
                    raise ValueError("two coefficients in term %r" % term)
                coef = Fraction(token)
        coef = _ONE if coef is None else coef
        key = tuple(exponents)
        coeffs[key] = coeffs.get(key, _ZERO) + coef
    return MultiSeries(coeffs, name=text)


def solve_dse_system(F_b: MultiSeries, F_c: MultiSeries, F_r: MultiSeries,
                     graft_factory, N: int, mode: str = "nc"):
    """X_delta = B+_delta(F_delta(X)) by degree-wise substitution; returns a
    dict label -> GradedSolution.  graft_factory(label) supplies B+_delta.

    Commutative solutions are projections of the free ones, as in solve_dse.
    """
    if mode == "comm":
        free = solve_dse_system(F_b, F_c, F_r, graft_factory, N, "nc")
        return {lab: sol.to_commutative() for lab, sol in free.items()}
    labels = ("b", "c", "r")
    series = {"b": F_b, "c": F_c, "r": F_r}
    grafts = {lab: graft_factory(lab) for lab in labels}
    comps = {lab: {} for lab in labels}
    for n in range(1, N + 1):
        sums = {}
        for lab in labels:
            acc = AlgebraElement.zero(mode)
            for d in range(1, n):
                acc = acc + comps[lab][d]
            sums[lab] = acc
        for lab in labels:
            acc = AlgebraElement.zero(mode)
            for (k1, k2, k3), a in series[lab].coeffs.items():
                monomial = AlgebraElement.unit(mode)
                for var_lab, k in zip(labels, (k1, k2, k3)):
                    if k:
                        monomial = monomial * power(sums[var_lab].truncate(n - 1), k)
                part = monomial.homogeneous_part(n - 1)
                if not part.is_zero():
                    acc = acc + grafts[lab].apply(part).scale(a)
            comps[lab][n] = acc
    return {lab: GradedSolution(comps[lab], N, mode) for lab in labels}


def verify_dse_system(sols: dict, F_b: MultiSeries, F_c: MultiSeries,
                      F_r: MultiSeries, graft_factory, N: int = None):
    """None on pass, else the first failing (label, degree)."""
    labels = ("b", "c", "r")
    series = {"b": F_b, "c": F_c, "r": F_r}
    N = min(s.cutoff for s in sols.values()) if N is None else N
    mode = sols["b"].mode
    if mode == "comm":
        refs = solve_dse_system(F_b, F_c, F_r, graft_factory, N, "comm")
        for n in range(1, N + 1):
            for lab in labels:
                if sols[lab].component(n) != refs[lab].component(n):
                    return (lab, n)
        return None
    fulls = {lab: sols[lab].partial_sum(N) for lab in labels}
    for n in range(1, N + 1):
        for lab in labels:
            acc = AlgebraElement.zero(mode)
            for (k1, k2, k3), a in series[lab].coeffs.items():
                monomial = AlgebraElement.unit(mode)
                for var_lab, k in zip(labels, (k1, k2, k3)):
                    if k:
                        monomial = monomial * power(fulls[var_lab].truncate(n - 1), k)
                part = monomial.homogeneous_part(n - 1)
                if not part.is_zero():
                    acc = acc + graft_factory(lab).apply(part).scale(a)
            if acc.homogeneous_part(n) != sols[lab].component(n):
                return (lab, n)
    return None


def foissy_series_check(P: FormalSeries, depth: int):
    """(alpha, beta) solving (1 - alpha beta t) P'(t) = alpha P(t) through
    the given depth, or None.  Constant P returns (0, 0)."""
    if depth < 3:
        raise ValueError("depth must be >= 3")
    a1 = P.coefficient(1)
    if a1 == 0:
        if P.is_constant_through(depth):
            return (_ZERO, _ZERO)
        return None
    alpha = a1
    # k = 1 instance: 2 a_2 = alpha a_1 + alpha beta a_1
    beta = (2 * P.coefficient(2) - alpha * a1) / (alpha * a1)
    for k in range(1, depth):
        lhs = (k + 1) * P.coefficient(k + 1)
        rhs = alpha * P.coefficient(k) + k * alpha * beta * P.coefficient(k)
        if lhs != rhs:
            return None
    return (alpha, beta)


# ---------------------------------------------------------------------------
# coproduct-closure checks


def _pair_sort_key(pair):
    return (pair[0].sort_key(), pair[1].sort_key())


def _tensor_dict(left: AlgebraElement, right: AlgebraElement) -> dict:
    out = {}
    for fl, cl in left.terms.items():
        for fr, cr in right.terms.items():
            key = (fl, fr)
            val = out.get(key, 0) + cl * cr
            if val:
                out[key] = val
            elif key in out:
                del out[key]
    return out


def _algebra_span(sol: GradedSolution, max_degree: int) -> dict:
    """Degree -> list of products of positive-degree solution components."""
    mode = sol.mode
    by_degree: dict = {0: [AlgebraElement.unit(mode)]}
    positive = {n: sol.component(n) for n in range(1, max_degree + 1)
                if not sol.component(n).is_zero()}
    for d in range(1, max_degree + 1):
        seen = set()
        out = []
        for n, x_n in positive.items():
            if n > d:
                continue
            for prefix in by_degree[d - n]:
                product = prefix * x_n
                if product.is_zero() or product in seen:
                    continue
                seen.add(product)
                out.append(product)
        by_degree[d] = out
    return by_degree


def subalgebra_closure_check(sol: GradedSolution, N: int = None):
    """None if Delta(x_n) lies in span(A (x) A) for every n <= N, where A is
    the algebra generated by the solution components; else the smallest
    failing degree."""
    N = sol.cutoff if N is None else N
    span = _algebra_span(sol, N)
    for n in range(1, N + 1):
        x_n = sol.component(n)
        if x_n.is_zero():
            continue
        target = coproduct(x_n).terms
        generators = []
        for p in range(0, n + 1):
            for left in span[p]:
                for right in span[n - p]:
                    generators.append(_tensor_dict(left, right))
        if solve_linear_membership(dict(target), generators,
                                   key_fn=_pair_sort_key) is None:
            return n
    return None


def bk_coproduct_formula_check(sol: GradedSolution, N: int = None):
    """Delta(x_n) = sum_{k=0}^n Pi^n_k (x) x_k with
    Pi^n_k = degree-(n-k) part of X^{k+1}; None on pass else the degree."""
    N = sol.cutoff if N is None else N
    full = sol.partial_sum(N)
    for n in range(1, N + 1):
        lhs = coproduct(sol.component(n))
        pairs = []
        for k in range(0, n + 1):
            pi_nk = _power_part(full, k + 1, n - k)
            x_k = sol.component(k)
            for (f, cf) in pi_nk.terms.items():
                for (g, cg) in x_k.terms.items():
                    pairs.append((f, g, cf * cg))
        rhs = TensorElement.from_terms(pairs, sol.mode)
        if lhs != rhs:
            return n
    return None


def _label_universe(components: dict) -> tuple:
    labels = set()

    def visit(tree):
        labels.add(tree.label)
        for child in tree.children:
            visit(child)

    for element in components.values():
        for forest in element.terms:
            for tree in forest.trees:
                visit(tree)
    return tuple(sorted(labels))


class IdealWitness:
    __slots__ = ("degree", "pair")

    def __init__(self, degree, pair=None):
        self.degree = degree
        self.pair = pair

    def __repr__(self):
        return "ideal condition fails at degree %d" % self.degree


def hopf_ideal_check(components: dict, N: int, mode: str = "comm"):
    """Check Delta(I) <= I (x) H + H (x) I for the ideal generated by the
    given homogeneous elements (degree -> element), truncated at degree N.

    Membership is decided over the vertex-label universe appearing in the
    generators; forests with labels outside it cannot occur in Delta of an
    ideal element nor help express one, so the restriction is exact.
    """
    if isinstance(components, GradedSolution):
        components = {n: components.component(n)
                      for n in range(1, components.cutoff + 1)}
    components = {n: x for n, x in components.items()
                  if n >= 1 and not x.is_zero()}
    if not components:
        return None
    for n, x in components.items():
        if x.mode != mode:
            raise ValueError("generator mode %r != %r" % (x.mode, mode))
    labels = _label_universe(components) or ("b",)
    forests = enumerate_forests(N, mode, labels=labels)
    basis = {0: [empty_forest(mode)]}
    for d in range(1, N + 1):
        basis[d] = forests[d]

    # spanning elements of the truncated ideal, by degree
    ideal: dict = {d: [] for d in range(0, N + 1)}
    for k, x_k in components.items():
        if k > N:
            continue
        for d in range(k, N + 1):
            for h in basis[d - k]:
                element = AlgebraElement.from_forest(h) * x_k
                if not element.is_zero():
                    ideal[d].append(element)

    for n in sorted(components):
        if n > N:
            continue
        target = coproduct(components[n]).terms
        generators = []
        for p in range(0, n + 1):
            q = n - p
            for g in ideal[p]:
                for h in basis[q]:
                    generators.append(_tensor_dict(g, AlgebraElement.from_forest(h)))
            for h in basis[p]:
                for g in ideal[q]:
                    generators.append(_tensor_dict(AlgebraElement.from_forest(h), g))
        if solve_linear_membership(dict(target), generators,
                                   key_fn=_pair_sort_key) is None:
            return IdealWitness(n)
    return None

"""The operad of flow charts and its Dyson-Schwinger solver.

Arity-n elements are spanned by planar rooted trees whose free input flags,
read left to right, are the n inputs; composition grafts the root of each
argument onto the matching flag.  Vertices with a single input act as the
identity on their input, so they are contracted away at construction; the
arity-1 component is then literally one-dimensional and the degree-1 step of
the solver is an exact scalar inversion.
"""

from __future__ import annotations

from fractions import Fraction

from .algebra import AlgebraElement
from .dse import FormalSeries, GradedSolution
from .linalg import solve_linear_membership
from .trees import (FREE, Flag, PlanarTree, _compositions, mk_forest, mk_tree,
                    parse_tree, render_tree)


class _IdentityOp:
    """The arity-1 identity: a bare wire with no vertices."""

    __slots__ = ()

    def __repr__(self):
        return "id"


IDENT = _IdentityOp()


def _contract(tree: PlanarTree):
    """Contract unary vertices; returns a PlanarTree or a bare Flag (wire)."""
    new_inputs = []
    for inp in tree.inputs:
        if isinstance(inp, PlanarTree):
            new_inputs.append(_contract(inp))
        else:
            if inp.fn is not None:
                raise ValueError("operad trees must have free input flags")
            new_inputs.append(inp)
    if len(new_inputs) == 1:
        return new_inputs[0]
    return mk_tree(tree.label, tuple(new_inputs))


def normalize_tree(tree: PlanarTree):
    """Basis representative of a tree: unary-free PlanarTree, or IDENT."""
    reduced = _contract(tree)
    return IDENT if isinstance(reduced, Flag) else reduced


def basis_arity(basis) -> int:
    return 1 if basis is IDENT else basis.num_flags()


def _basis_key(basis):
    return (0,) if basis is IDENT else (1,) + basis.sort_key()


class OperadElement:
    """Finite linear combination of arity-n basis trees (or the identity)."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: dict):
        self.arity = arity
        self.terms = {b: Fraction(c) for b, c in terms.items() if c}
        for basis in self.terms:
            if basis_arity(basis) != arity:
                raise ValueError("basis arity %d != element arity %d"
                                 % (basis_arity(basis), arity))

    @classmethod
    def zero(cls, arity: int) -> "OperadElement":
        return cls(arity, {})

    @classmethod
    def identity(cls, scalar=1) -> "OperadElement":
        return cls(1, {IDENT: Fraction(scalar)})

    @classmethod
    def from_tree(cls, tree: PlanarTree, coef=1) -> "OperadElement":
        basis = normalize_tree(tree)
        return cls(basis_arity(basis), {basis: Fraction(coef)})

    def is_zero(self) -> bool:
        return not self.terms

    def scale(self, scalar) -> "OperadElement":
        scalar = Fraction(scalar)
        if scalar == 0:
            return OperadElement.zero(self.arity)
        return OperadElement(self.arity,
                             {b: c * scalar for b, c in self.terms.items()})

    def __add__(self, other: "OperadElement") -> "OperadElement":
        if self.arity != other.arity:
            raise ValueError("arity mismatch: %d vs %d"
                             % (self.arity, other.arity))
        out = dict(self.terms)
        for b, c in other.terms.items():
            out[b] = out.get(b, Fraction(0)) + c
        return OperadElement(self.arity, out)

    def __sub__(self, other: "OperadElement") -> "OperadElement":
        return self + other.scale(-1)

    def __eq__(self, other):
        return (isinstance(other, OperadElement) and self.arity == other.arity
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.arity, frozenset(self.terms.items())))

    def __repr__(self):
        return render_operad(self)


def render_operad(x: OperadElement) -> str:
    if not x.terms:
        return "0"
    chunks = []
    for i, basis in enumerate(sorted(x.terms, key=_basis_key)):
        coef = x.terms[basis]
        body = "id" if basis is IDENT else render_tree(basis)
        if abs(coef) != 1:
            body = "%s %s" % (abs(coef), body)
        if i == 0:
            chunks.append(body if coef > 0 else "-" + body)
        else:
            chunks.append((" + " if coef > 0 else " - ") + body)
    return "".join(chunks)


def operad_to_json(x: OperadElement) -> dict:
    from .trees import tree_to_json
    terms = []
    for basis in sorted(x.terms, key=_basis_key):
        entry = {"coef": str(x.terms[basis])}
        if basis is IDENT:
            entry["id"] = True
        else:
            entry["tree"] = tree_to_json(basis)
        terms.append(entry)
    return {"arity": x.arity, "terms": terms}


def delta_corolla(label: str, arity: int) -> OperadElement:
    """The single-vertex element with the given number of input flags."""
    if arity < 2:
        raise ValueError("corolla arity must be >= 2 (arity 1 is the identity)")
    return OperadElement.from_tree(mk_tree(label, (FREE,) * arity))


def parse_operad_tree(text: str) -> OperadElement:
    """Tree DSL with #i markers for input flags; 'id' for the identity."""
    if text.strip() == "id":
        return OperadElement.identity()
    return OperadElement.from_tree(parse_tree(text))


def _graft_basis(basis, args):
    """Replace the i-th free flag of basis with the root of args[i]."""
    if basis is IDENT:
        return args[0]
    it = iter(args)

    def walk(tree: PlanarTree) -> PlanarTree:
        new_inputs = []
        for inp in tree.inputs:
            if isinstance(inp, PlanarTree):
                new_inputs.append(walk(inp))
            else:
                g = next(it)
                new_inputs.append(inp if g is IDENT else g)
        return mk_tree(tree.label, tuple(new_inputs))

    return walk(basis)


def operad_compose(f: OperadElement, args) -> OperadElement:
    """f composed with one argument per input flag; multilinear."""
    args = tuple(args)
    if f.arity != len(args):
        raise ValueError("arity mismatch: f has arity %d, got %d arguments"
                         % (f.arity, len(args)))
    out_arity = sum(g.arity for g in args)
    acc: dict = {}
    pools = [list(g.terms.items()) for g in args]
    for basis_f, coef_f in f.terms.items():
        stack = [((), coef_f)]
        for pool in pools:
            stack = [(chosen + (b,), c * cb) for chosen, c in stack
                     for b, cb in pool]
        for chosen, coef in stack:
            result = _graft_basis(basis_f, chosen)
            acc[result] = acc.get(result, Fraction(0)) + coef
    return OperadElement(out_arity, acc)


class OperadSolution:
    """Arity-graded components of a truncated operadic solution."""

    __slots__ = ("components", "cutoff")

    def __init__(self, components: dict, cutoff: int):
        self.components = dict(components)
        self.cutoff = cutoff

    def component(self, n: int) -> OperadElement:
        if n < 1 or n > self.cutoff:
            raise ValueError("component %d beyond cutoff %d" % (n, self.cutoff))
        return self.components.get(n, OperadElement.zero(n))

    def __repr__(self):
        return "\n".join("x_%d = %r" % (n, self.components[n])
                         for n in sorted(self.components))


def _beta_scalar(beta: dict):
    """The scalar lambda with beta_1 = lambda * id (0 when absent)."""
    b1 = beta.get(1)
    if b1 is None:
        return Fraction(0)
    if b1.arity != 1:
        raise ValueError("beta_1 must have arity 1")
    return b1.terms.get(IDENT, Fraction(0))


def solve_operad_dse(a: FormalSeries, beta: dict, N: int) -> OperadSolution:
    """Truncated solution of X = beta(P(X)) with X graded by arity.

    The arity-1 step solves (1 - a_1 beta_1) x_1 = id exactly; each later
    component is (1 - a_1 lambda)^(-1) times the arity-n part of the right
    side with k >= 2.
    """
    if N < 1:
        raise ValueError("cutoff must be >= 1")
    lam = _beta_scalar(beta)
    a1 = a.coefficient(1)
    if a1 * lam == 1:
        raise ValueError("non-invertible degree-1 operator")
    inv = 1 / (1 - a1 * lam)
    comps = {1: OperadElement.identity(inv)}
    for n in range(2, N + 1):
        acc = OperadElement.zero(n)
        for k in range(2, n + 1):
            a_k = a.coefficient(k)
            beta_k = beta.get(k)
            if a_k == 0 or beta_k is None or beta_k.is_zero():
                continue
            for parts in _compositions(n, k):
                term = operad_compose(beta_k, [comps[j] for j in parts])
                acc = acc + term.scale(a_k)
        comps[n] = acc.scale(inv)
    return OperadSolution(comps, N)


def verify_operad_dse(sol: OperadSolution, a: FormalSeries, beta: dict,
                      N: int = None):
    """None on pass, else the first arity where X != beta(P(X))."""
    N = sol.cutoff if N is None else N
    lam = _beta_scalar(beta)
    for n in range(1, N + 1):
        if n == 1:
            rhs = OperadElement.identity() + sol.component(1).scale(
                a.coefficient(1) * lam)
        else:
            rhs = sol.component(n).scale(a.coefficient(1) * lam)
            for k in range(2, n + 1):
                a_k = a.coefficient(k)
                beta_k = beta.get(k)
                if a_k == 0 or beta_k is None or beta_k.is_zero():
                    continue
                for parts in _compositions(n, k):
                    term = operad_compose(beta_k, [sol.component(j)
                                                   for j in parts])
                    rhs = rhs + term.scale(a_k)
        if rhs != sol.component(n):
            return n
    return None


def suboperad_span(sol: OperadSolution, n: int):
    """Spanning set of the self-similar arity-n subspace: all compositions
    x_k(x_{j_1},...,x_{j_k}) with j_1+...+j_k = n."""
    if n < 1 or n > sol.cutoff:
        raise ValueError("arity %d beyond cutoff %d" % (n, sol.cutoff))
    out = []
    seen = set()
    for k in range(1, n + 1):
        for parts in _compositions(n, k):
            x = operad_compose(sol.component(k), [sol.component(j)
                                                  for j in parts])
            if not x.is_zero() and x not in seen:
                seen.add(x)
                out.append(x)
    return out


def suboperad_closure_check(sol: OperadSolution, max_arity: int):
    """Compose spanning elements pairwise and test membership of the result
    in the spanning set of its arity; None on pass, else a witness tuple
    (outer_arity, slot, inner_arity)."""
    spans = {n: suboperad_span(sol, n) for n in range(1, max_arity + 1)}
    for n in range(1, max_arity + 1):
        for f in spans[n]:
            for m in range(1, max_arity - n + 2):
                for g in spans[m]:
                    for slot in range(n):
                        args = [sol.component(1)] * n
                        args[slot] = g
                        result = operad_compose(f, args)
                        generators = [x.terms for x in spans[result.arity]]
                        if solve_linear_membership(
                                dict(result.terms), generators,
                                key_fn=_basis_key) is None:
                            return (n, slot, m)
    return None


def forget_flags(x: OperadElement) -> AlgebraElement:
    """Erase input flags, landing in the free algebra; id maps to the unit."""

    def strip(tree: PlanarTree) -> PlanarTree:
        return mk_tree(tree.label,
                       tuple(strip(c) for c in tree.inputs
                             if isinstance(c, PlanarTree)))

    acc: dict = {}
    for basis, coef in x.terms.items():
        forest = (mk_forest((), "nc") if basis is IDENT
                  else mk_forest((strip(basis),), "nc"))
        acc[forest] = acc.get(forest, Fraction(0)) + coef
    return AlgebraElement(acc, "nc")


def matching_hopf_series(a: FormalSeries, depth: int) -> FormalSeries:
    """The series Q with Q(t) = P(1+t) - 1 = sum_{k>=2} a_k (1+t)^k for a
    series P with a_1 = 0; requires finite support and constant term 1."""
    if a.coefficient(1) != 0:
        raise ValueError("matching series needs a_1 = 0")
    if a.support_bound is None:
        raise ValueError("matching series needs finite support")
    K = a.support_bound

    def binom(k, m):
        out = 1
        for i in range(m):
            out = out * (k - i) // (i + 1)
        return out

    coeffs = []
    for m in range(0, max(depth, K) + 1):
        c = sum(a.coefficient(k) * binom(k, m)
                for k in range(max(2, m), K + 1))
        coeffs.append(c)
    if coeffs[0] != 1:
        raise ValueError("rebased series has constant term %s, expected 1"
                         % (coeffs[0],))
    return FormalSeries.from_coefficients(coeffs[1:],
                                          name="rebased(%s)" % (a.name,))


def operad_hopf_correspondence_check(a: FormalSeries, label: str,
                                     hopf_sol: GradedSolution,
                                     arity_cutoff: int):
    """Compare the flag-forgetful image of the operadic solution, regraded by
    vertex count, with a Hopf-side solution; None on pass else the degree.

    The operadic data must use the single-label corolla family beta_k and a
    series with a_1 = 0 and finite support; hopf_sol should solve the tree
    equation for the rebased series (matching_hopf_series)."""
    if a.support_bound is None:
        raise ValueError("correspondence check needs finite support")
    beta = {k: delta_corolla(label, k)
            for k in range(2, a.support_bound + 1)}
    op_sol = solve_operad_dse(a, beta, arity_cutoff)
    image = AlgebraElement.zero("nc")
    for n in range(1, arity_cutoff + 1):
        image = image + forget_flags(op_sol.component(n))
    max_degree = (arity_cutoff - 1) // max(a.support_bound - 1, 1)
    for degree in range(0, max_degree + 1):
        want = (AlgebraElement.unit("nc") if degree == 0
                else hopf_sol.component(degree))
        if image.homogeneous_part(degree) != want:
            return degree
    return None

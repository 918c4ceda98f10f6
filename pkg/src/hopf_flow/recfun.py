"""Partial recursive functions: syntax, signatures, fuel-bounded evaluation.

Naturals start at 1.  Basic functions: successor S, constants C[n] (value 1),
projections P[i,n].  Operations: composition comp(f;g) = g o f (f applied
first), bracketing br(f1,...,fk), primitive recursion rec(f;g) with

    h(x,1) = f(x),   h(x,k+1) = g(x,k,h(x,k)),

k-ary recursion krec(f1,...,fk;g) implemented verbatim from its defining
equations (the step consumes the base functions' values and the index, not
the running value):

    h(x,i) = f_i(x) for i <= k,   h(x,k+l) = g(x,f1(x),...,fk(x),k+l-1),

unbounded search mu(f) probing y = 1,2,... for the first f(x,y) = 1 (every
probe must halt), and the nowhere-defined function empty[m,n].

Evaluation is strict and fuel-bounded: one fuel unit per AST node visit plus
one per mu probe; exhaustion yields OutOfFuel(consumed).  Flow charts are
flag-decorated planar trees whose admissible labelings are checked leaf to
root; rejected grafts are totalized to the empty function.
"""

from __future__ import annotations

from .trees import Flag, PlanarTree, mk_flag, mk_tree


class SignatureError(ValueError):
    pass


class RecFunExpr:
    """Base class; nodes are interned so equality is identity."""

    __slots__ = ("sig", "_hash")

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return _render(self)


class SNode(RecFunExpr):
    __slots__ = ()

    def __init__(self):
        self.sig = (1, 1)
        self._hash = hash("S")


class ConstNode(RecFunExpr):
    __slots__ = ("arity",)

    def __init__(self, arity: int):
        if arity < 0:
            raise SignatureError("C[n] needs n >= 0")
        self.arity = arity
        self.sig = (arity, 1)
        self._hash = hash(("C", arity))


class ProjNode(RecFunExpr):
    __slots__ = ("index", "arity")

    def __init__(self, index: int, arity: int):
        if not 1 <= index <= arity:
            raise SignatureError("P[i,n] needs 1 <= i <= n")
        self.index = index
        self.arity = arity
        self.sig = (arity, 1)
        self._hash = hash(("P", index, arity))


class CompNode(RecFunExpr):
    __slots__ = ("first", "second")

    def __init__(self, first: RecFunExpr, second: RecFunExpr):
        m, n = first.sig
        n2, p = second.sig
        if n != n2:
            raise SignatureError(
                "comp: inner output arity %d != outer input arity %d" % (n, n2))
        self.first = first
        self.second = second
        self.sig = (m, p)
        self._hash = hash(("comp", first, second))


class BracketNode(RecFunExpr):
    __slots__ = ("parts",)

    def __init__(self, parts):
        if not parts:
            raise SignatureError("br needs at least one argument")
        m = parts[0].sig[0]
        for p in parts:
            if p.sig[0] != m:
                raise SignatureError("br: all arguments must share input arity")
        self.parts = parts
        self.sig = (m, sum(p.sig[1] for p in parts))
        self._hash = hash(("br", parts))


class PrimRecNode(RecFunExpr):
    __slots__ = ("base", "step")

    def __init__(self, base: RecFunExpr, step: RecFunExpr):
        n, out = base.sig
        if out != 1:
            raise SignatureError("rec: base must have output arity 1")
        if step.sig != (n + 2, 1):
            raise SignatureError(
                "rec: step must have signature (%d,1), got %r" % (n + 2, step.sig))
        self.base = base
        self.step = step
        self.sig = (n + 1, 1)
        self._hash = hash(("rec", base, step))


class KRecNode(RecFunExpr):
    __slots__ = ("bases", "step")

    def __init__(self, bases, step: RecFunExpr):
        if not bases:
            raise SignatureError("krec needs at least one base function")
        n = bases[0].sig[0]
        for b in bases:
            if b.sig != (n, 1):
                raise SignatureError("krec: bases must share signature (n,1)")
        k = len(bases)
        if step.sig != (n + k + 1, 1):
            raise SignatureError(
                "krec: step must have signature (%d,1), got %r"
                % (n + k + 1, step.sig))
        self.bases = bases
        self.step = step
        self.sig = (n + 1, 1)
        self._hash = hash(("krec", bases, step))


class MuNode(RecFunExpr):
    __slots__ = ("body",)

    def __init__(self, body: RecFunExpr):
        m, out = body.sig
        if out != 1:
            raise SignatureError("mu: body must have output arity 1")
        if m < 1:
            raise SignatureError("mu: body needs at least one input")
        self.body = body
        self.sig = (m - 1, 1)
        self._hash = hash(("mu", body))


class EmptyNode(RecFunExpr):
    __slots__ = ()

    def __init__(self, m: int, n: int):
        if n < 1 or m < 0:
            raise SignatureError("empty[m,n] needs m >= 0 and n >= 1")
        self.sig = (m, n)
        self._hash = hash(("empty", m, n))


_POOL: dict = {}


def _intern(key, factory):
    try:
        return _POOL[key]
    except KeyError:
        return _POOL.setdefault(key, factory())


S = _intern("S", SNode)


def const(arity: int) -> ConstNode:
    return _intern(("C", arity), lambda: ConstNode(arity))


def proj(index: int, arity: int) -> ProjNode:
    return _intern(("P", index, arity), lambda: ProjNode(index, arity))


def comp(first: RecFunExpr, second: RecFunExpr) -> CompNode:
    return _intern(("comp", first, second), lambda: CompNode(first, second))


def bracket(*parts) -> BracketNode:
    parts = tuple(parts)
    return _intern(("br", parts), lambda: BracketNode(parts))


def primrec(base: RecFunExpr, step: RecFunExpr) -> PrimRecNode:
    return _intern(("rec", base, step), lambda: PrimRecNode(base, step))


def krec(bases, step: RecFunExpr) -> KRecNode:
    bases = tuple(bases)
    return _intern(("krec", bases, step), lambda: KRecNode(bases, step))


def mu(body: RecFunExpr) -> MuNode:
    return _intern(("mu", body), lambda: MuNode(body))


def empty(m: int = 1, n: int = 1) -> EmptyNode:
    return _intern(("empty", m, n), lambda: EmptyNode(m, n))


def signature(expr: RecFunExpr):
    return expr.sig


def _render(expr: RecFunExpr) -> str:
    if isinstance(expr, SNode):
        return "S"
    if isinstance(expr, ConstNode):
        return "C[%d]" % expr.arity
    if isinstance(expr, ProjNode):
        return "P[%d,%d]" % (expr.index, expr.arity)
    if isinstance(expr, CompNode):
        return "comp(%s;%s)" % (_render(expr.first), _render(expr.second))
    if isinstance(expr, BracketNode):
        return "br(%s)" % ",".join(_render(p) for p in expr.parts)
    if isinstance(expr, PrimRecNode):
        return "rec(%s;%s)" % (_render(expr.base), _render(expr.step))
    if isinstance(expr, KRecNode):
        return "krec(%s;%s)" % (",".join(_render(b) for b in expr.bases),
                                _render(expr.step))
    if isinstance(expr, MuNode):
        return "mu(%s)" % _render(expr.body)
    if isinstance(expr, EmptyNode):
        return "empty[%d,%d]" % expr.sig
    raise TypeError(expr)


def render_recfun(expr: RecFunExpr) -> str:
    return _render(expr)


# ---------------------------------------------------------------------------
# evaluation


class Halted:
    __slots__ = ("values",)

    def __init__(self, values):
        self.values = tuple(values)

    def __eq__(self, other):
        return isinstance(other, Halted) and self.values == other.values

    def __hash__(self):
        return hash(("halted", self.values))

    def __repr__(self):
        return "Halted(%s)" % ",".join(str(v) for v in self.values)


class OutOfFuel:
    __slots__ = ("consumed",)

    def __init__(self, consumed: int):
        self.consumed = consumed

    def __eq__(self, other):
        return isinstance(other, OutOfFuel) and self.consumed == other.consumed

    def __hash__(self):
        return hash(("oof", self.consumed))

    def __repr__(self):
        return "OutOfFuel(%d)" % self.consumed


class _Starved(Exception):
    pass


class _Tank:
    __slots__ = ("left",)

    def __init__(self, amount: int):
        self.left = amount

    def tick(self):
        self.left -= 1
        if self.left < 0:
            self.left = 0
            raise _Starved()


def _eval(expr: RecFunExpr, args, tank: _Tank):
    tank.tick()
    if isinstance(expr, SNode):
        return (args[0] + 1,)
    if isinstance(expr, ConstNode):
        return (1,)
    if isinstance(expr, ProjNode):
        return (args[expr.index - 1],)
    if isinstance(expr, CompNode):
        return _eval(expr.second, _eval(expr.first, args, tank), tank)
    if isinstance(expr, BracketNode):
        out = []
        for part in expr.parts:
            out.extend(_eval(part, args, tank))
        return tuple(out)
    if isinstance(expr, PrimRecNode):
        head, t = args[:-1], args[-1]
        value = _eval(expr.base, head, tank)[0]
        for k in range(1, t):
            value = _eval(expr.step, head + (k, value), tank)[0]
        return (value,)
    if isinstance(expr, KRecNode):
        head, t = args[:-1], args[-1]
        k = len(expr.bases)
        if t <= k:
            return _eval(expr.bases[t - 1], head, tank)
        # rolling window of the k most recent values, seeded by the bases;
        # step sees (head, h(t-k), ..., h(t-1), t-1), so k = 1 is primitive
        # recursion with the step's last two arguments swapped
        window = [_eval(b, head, tank)[0] for b in expr.bases]
        for counter in range(k + 1, t + 1):
            value = _eval(expr.step,
                          head + tuple(window) + (counter - 1,), tank)[0]
            window.pop(0)
            window.append(value)
        return (window[-1],)
    if isinstance(expr, MuNode):
        probe = 1
        while True:
            tank.tick()
            if _eval(expr.body, args + (probe,), tank)[0] == 1:
                return (probe,)
            probe += 1
    if isinstance(expr, EmptyNode):
        tank.left = 0
        raise _Starved()
    raise TypeError(expr)


def evaluate(expr: RecFunExpr, args, fuel: int):
    """Strict evaluation; Halted(values) or OutOfFuel(consumed)."""
    args = tuple(args)
    if len(args) != expr.sig[0]:
        raise ValueError("expected %d arguments, got %d"
                         % (expr.sig[0], len(args)))
    for a in args:
        if not isinstance(a, int) or a < 1:
            raise ValueError("arguments must be naturals >= 1, got %r" % (a,))
    if fuel < 0:
        raise ValueError("fuel must be >= 0")
    tank = _Tank(fuel)
    try:
        values = _eval(expr, args, tank)
    except _Starved:
        return OutOfFuel(fuel - tank.left)
    except RecursionError:
        return OutOfFuel(fuel - tank.left)
    return Halted(values)


_EVAL_CACHE: dict = {}


def evaluate_cached(expr: RecFunExpr, args, fuel: int):
    key = (expr, tuple(args), fuel)
    try:
        return _EVAL_CACHE[key]
    except KeyError:
        return _EVAL_CACHE.setdefault(key, evaluate(expr, args, fuel))


def fbar(expr: RecFunExpr, args, fuel: int) -> int:
    """Totalization: the halted value, or 0 when fuel runs out."""
    if expr.sig[1] != 1:
        raise ValueError("fbar needs a single-output function")
    result = evaluate_cached(expr, args, fuel)
    return result.values[0] if isinstance(result, Halted) else 0


# ---------------------------------------------------------------------------
# the recfun DSL


class RecFunParseError(ValueError):
    def __init__(self, message, offset):
        super().__init__("%s at offset %d" % (message, offset))
        self.offset = offset


def _skip_ws(text, pos):
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _parse_int(text, pos):
    pos = _skip_ws(text, pos)
    start = pos
    while pos < len(text) and text[pos].isdigit():
        pos += 1
    if pos == start:
        raise RecFunParseError("expected integer", start)
    return int(text[start:pos]), pos


def _expect(text, pos, ch):
    pos = _skip_ws(text, pos)
    if pos >= len(text) or text[pos] != ch:
        raise RecFunParseError("expected %r" % ch, pos)
    return pos + 1


def _parse_expr(text, pos):
    pos = _skip_ws(text, pos)
    for head in ("comp", "krec", "rec", "br", "mu"):
        if text.startswith(head, pos):
            after = _skip_ws(text, pos + len(head))
            if after < len(text) and text[after] == "(":
                return _parse_call(head, text, after + 1)
    if text.startswith("empty", pos):
        pos2 = _expect(text, pos + 5, "[")
        m, pos2 = _parse_int(text, pos2)
        pos2 = _expect(text, pos2, ",")
        n, pos2 = _parse_int(text, pos2)
        pos2 = _expect(text, pos2, "]")
        return _build(empty, (m, n), pos), pos2
    if text.startswith("S", pos):
        return S, pos + 1
    if text.startswith("C", pos):
        pos2 = _expect(text, pos + 1, "[")
        n, pos2 = _parse_int(text, pos2)
        pos2 = _expect(text, pos2, "]")
        return _build(const, (n,), pos), pos2
    if text.startswith("P", pos):
        pos2 = _expect(text, pos + 1, "[")
        i, pos2 = _parse_int(text, pos2)
        pos2 = _expect(text, pos2, ",")
        n, pos2 = _parse_int(text, pos2)
        pos2 = _expect(text, pos2, "]")
        return _build(proj, (i, n), pos), pos2
    raise RecFunParseError("expected a recursive-function expression", pos)


def _build(factory, args, offset):
    try:
        return factory(*args)
    except SignatureError as exc:
        raise RecFunParseError(str(exc), offset) from None


def _parse_call(head, text, pos):
    args = []
    semis = []
    while True:
        expr, pos = _parse_expr(text, pos)
        args.append(expr)
        pos = _skip_ws(text, pos)
        if pos >= len(text):
            raise RecFunParseError("unterminated call", pos)
        ch = text[pos]
        if ch == ",":
            pos += 1
            continue
        if ch == ";":
            semis.append(len(args))
            pos += 1
            continue
        if ch == ")":
            pos += 1
            break
        raise RecFunParseError("expected ',', ';' or ')'", pos)
    start = pos
    if head == "comp":
        if len(args) != 2 or semis != [1]:
            raise RecFunParseError("comp takes exactly comp(f;g)", start)
        return _build(comp, (args[0], args[1]), start), pos
    if head == "rec":
        if len(args) != 2 or semis != [1]:
            raise RecFunParseError("rec takes exactly rec(f;g)", start)
        return _build(primrec, (args[0], args[1]), start), pos
    if head == "krec":
        if len(args) < 2 or semis != [len(args) - 1]:
            raise RecFunParseError("krec takes krec(f1,...,fk;g)", start)
        return _build(krec, (args[:-1], args[-1]), start), pos
    if head == "br":
        if semis:
            raise RecFunParseError("br takes comma-separated arguments", start)
        return _build(bracket, tuple(args), start), pos
    if head == "mu":
        if len(args) != 1 or semis:
            raise RecFunParseError("mu takes a single argument", start)
        return _build(mu, (args[0],), start), pos
    raise RecFunParseError("unknown operation %r" % head, start)


def parse_recfun(text: str) -> RecFunExpr:
    expr, pos = _parse_expr(text, 0)
    pos = _skip_ws(text, pos)
    if pos != len(text):
        raise RecFunParseError("unexpected trailing input", pos)
    return expr


def recfun_flag_parser(text: str, pos: int):
    """Adapter for the tree DSL's in(...) leaves: parse, return new offset."""
    return _parse_expr(text, pos)


# ---------------------------------------------------------------------------
# flow charts: admissibility of flag-decorated trees

# canonical vertex arities used when a vertex-labeled tree is reinterpreted
# as a flow chart with free input positions
CANONICAL_ARITY = {"b": 2, "c": 2, "r": 2, "m": 1}


class AdmissibilityFailure:
    __slots__ = ("path", "reason")

    def __init__(self, path, reason):
        self.path = tuple(path)
        self.reason = reason

    def __repr__(self):
        where = "root" if not self.path else "vertex " + ".".join(map(str, self.path))
        return "inadmissible at %s: %s" % (where, self.reason)


class InadmissibleTree(ValueError):
    def __init__(self, failure: AdmissibilityFailure):
        super().__init__(repr(failure))
        self.failure = failure


_ADMISSIBLE_CACHE: dict = {}


def admissible_output(tree: PlanarTree) -> RecFunExpr:
    """The output function of a fully labeled flow chart (or raise)."""
    try:
        return _ADMISSIBLE_CACHE[tree]
    except KeyError:
        pass
    expr = _admissible(tree, ())
    return _ADMISSIBLE_CACHE.setdefault(tree, expr)


def _admissible(tree: PlanarTree, path) -> RecFunExpr:
    inputs = []
    for i, inp in enumerate(tree.inputs):
        if isinstance(inp, PlanarTree):
            inputs.append(_admissible(inp, path + (i + 1,)))
        elif inp.fn is None:
            raise InadmissibleTree(AdmissibilityFailure(
                path, "free input flag without a function label"))
        else:
            inputs.append(inp.fn)
    label = tree.label
    try:
        if label == "b":
            if len(inputs) < 1:
                raise SignatureError("b-vertex needs at least one input")
            return bracket(*inputs)
        if label == "c":
            if len(inputs) < 2:
                raise SignatureError("c-vertex needs at least two inputs")
            out = inputs[0]
            for nxt in inputs[1:]:
                out = comp(out, nxt)
            return out
        if label == "r":
            if len(inputs) < 2:
                raise SignatureError("r-vertex needs at least two inputs")
            if len(inputs) == 2:
                return primrec(inputs[0], inputs[1])
            return krec(inputs[:-1], inputs[-1])
        if label == "m":
            if len(inputs) != 1:
                raise SignatureError("m-vertex needs exactly one input")
            return mu(inputs[0])
    except SignatureError as exc:
        raise InadmissibleTree(AdmissibilityFailure(path, str(exc))) from None
    raise InadmissibleTree(AdmissibilityFailure(path, "unknown label %r" % label))


def admissible_check(tree: PlanarTree):
    """RecFunExpr on success, AdmissibilityFailure on rejection."""
    try:
        return admissible_output(tree)
    except InadmissibleTree as exc:
        return exc.failure


# ---------------------------------------------------------------------------
# basic-input assignments for vertex-labeled trees (sigma)


def _analyze_vertex_mode(tree: PlanarTree):
    """(in_arity, out_arity, [slot required arities]) for a vertex-mode tree.

    Each vertex is padded with free input positions up to its canonical
    arity (children occupy the leftmost positions).  Required arities are
    derived from subtree signatures only; unconstrained positions default
    to arity 1 so that the assignment alphabet stays finite.
    """
    if tree.has_flags():
        raise ValueError("sigma analysis expects a vertex-labeled tree")
    children = [(_analyze_vertex_mode(c), c) for c in tree.children]
    label = tree.label
    n_slots = max(CANONICAL_ARITY[label] - len(children), 0)
    slot_reqs = []
    for (_, _, sub_reqs), _c in children:
        slot_reqs.extend(sub_reqs)

    child_sigs = [(cin, cout) for (cin, cout, _), _c in children]
    own = []
    if label == "b":
        m = child_sigs[0][0] if child_sigs else 1
        own = [m] * n_slots
        out = sum(cout for _, cout in child_sigs) + n_slots
        v_in = m
    elif label == "c":
        # chain: each position's input arity is the previous output arity
        prev_out = None
        v_in = 1
        pos = 0
        for cin, cout in child_sigs:
            if pos == 0:
                v_in = cin
            prev_out = cout
            pos += 1
        for _ in range(n_slots):
            own.append(1 if prev_out is None else prev_out)
            prev_out = 1
            pos += 1
        out = prev_out if prev_out is not None else 1
        if child_sigs and n_slots == 0:
            out = child_sigs[-1][1]
    elif label == "r":
        k_total = len(children) + n_slots  # total inputs, >= 2
        if child_sigs:
            # the first input is always a base function of signature (n,1)
            n = child_sigs[0][0]
            for pos in range(len(children), k_total):
                # bases need arity n; the step (last position) needs n+k_total
                own.append(n + k_total if pos == k_total - 1 else n)
            v_in = n + 1
        else:
            own = [1] * n_slots
            v_in = 2
        out = 1
    elif label == "m":
        if children:
            v_in = max(child_sigs[0][0] - 1, 0)
        else:
            own = [1] * n_slots
            v_in = 0
        out = 1
    else:
        raise ValueError("unknown label %r" % label)
    return v_in, out, slot_reqs + own


def sigma_positions(tree: PlanarTree):
    """Required arities of the free input positions, in planar order."""
    _, _, reqs = _analyze_vertex_mode(tree)
    return reqs


def sigma_candidates(required_arity: int):
    """S, the constant, and each projection at the position's arity."""
    out = [S, const(required_arity)]
    out.extend(proj(i, required_arity) for i in range(1, required_arity + 1))
    return out


def sigma_assignments(tree: PlanarTree, cap: int):
    """All capped basic-input assignments (cartesian product of candidates)."""
    reqs = sigma_positions(tree)
    total = 1
    for r in reqs:
        total *= len(sigma_candidates(r))
    if total > cap:
        raise ValueError("sigma assignment count %d exceeds cap %d" % (total, cap))
    pools = [sigma_candidates(r) for r in reqs]
    out = [()]
    for pool in pools:
        out = [tup + (cand,) for tup in out for cand in pool]
    return out


def attach_sigma(tree: PlanarTree, sigma) -> PlanarTree:
    """Flag-decorate a vertex-labeled tree with the basic inputs in sigma."""
    sigma = list(sigma)
    reqs = sigma_positions(tree)
    if len(sigma) != len(reqs):
        raise ValueError("expected %d basic inputs, got %d"
                         % (len(reqs), len(sigma)))
    for fn in sigma:
        if not isinstance(fn, (SNode, ConstNode, ProjNode)):
            raise ValueError("sigma entries must be basic functions, got %r" % (fn,))
    it = iter(sigma)

    def rebuild(t: PlanarTree) -> PlanarTree:
        new_inputs = [rebuild(c) for c in t.children]
        n_slots = max(CANONICAL_ARITY[t.label] - len(t.children), 0)
        for _ in range(n_slots):
            new_inputs.append(mk_flag(next(it)))
        return mk_tree(t.label, tuple(new_inputs))

    return rebuild(tree)


def flowchart_output_vertexmode(tree: PlanarTree, sigma):
    """Output function of a vertex-mode tree under a basic-input assignment.

    Inadmissible assignments are totalized to the empty function of the
    tree's structural arity.
    """
    flagged = attach_sigma(tree, sigma)
    result = admissible_check(flagged)
    if isinstance(result, AdmissibilityFailure):
        v_in, v_out, _ = _analyze_vertex_mode(tree)
        return empty(v_in, max(v_out, 1))
    return result


# ---------------------------------------------------------------------------
# binarization


def binarize(tree: PlanarTree) -> PlanarTree:
    """Expand b-vertices of arity > 2 into right-nested binary chains and
    c-vertices of arity > 2 into left-nested chains; r and m are untouched
    (no semantics-preserving binary expansion of k-ary recursion is used)."""
    new_inputs = tuple(
        binarize(i) if isinstance(i, PlanarTree) else i for i in tree.inputs)
    label = tree.label
    if label == "b" and len(new_inputs) > 2:
        acc = mk_tree("b", new_inputs[-2:])
        for inp in reversed(new_inputs[:-2]):
            acc = mk_tree("b", (inp, acc))
        return acc
    if label == "c" and len(new_inputs) > 2:
        acc = mk_tree("c", new_inputs[:2])
        for inp in new_inputs[2:]:
            acc = mk_tree("c", (acc, inp))
        return acc
    return mk_tree(label, new_inputs)

"""The properad of flow charts on connected acyclic dags, and its solver.

Basis objects are planar connected directed acyclic graphs with ordered
input and output flags; vertices carry (label, in-arity, out-arity) with the
elementary labels restricted to one output and "macro" labels free.  The
bi-arity (1,1) identity is the bare edge EDGE, kept as a sentinel exactly
like the operad identity.

The Dyson-Schwinger solver follows the block recursion: the (m,<=m)
components solve (I - Lambda_m) Y_m = unit + Lambda_m V(m) where Lambda puts
the series coefficient with the in-arity of the beta component it multiplies;
the scalar multiple of the bare edge inside beta_{1,1} is inverted exactly
and the vertexful remainder by a Neumann iteration graded by vertex count.
Components with more outputs than inputs follow by direct substitution.
"""

from __future__ import annotations

from fractions import Fraction

from .dse import FormalSeries
from .linalg import solve_linear_membership
from .trees import PlanarTree, _compositions


class DagError(ValueError):
    pass


class _EdgeWire:
    """The bi-arity (1,1) identity: one wire, no vertices."""

    __slots__ = ()
    m = 1
    n = 1
    num_vertices = 0

    def sort_key(self):
        return (0, 1, 1, (), (), ())

    def __repr__(self):
        return "edge"


EDGE = _EdgeWire()


def _source_key(src):
    return (0, src[1], 0) if src[0] == "g" else (1, src[1], src[2])


class FlowDag:
    """Canonical connected acyclic dag; build through mk_dag only."""

    __slots__ = ("vertices", "in_sources", "outputs", "m", "n",
                 "num_vertices", "_hash", "_key")

    def __init__(self, vertices, in_sources, outputs):
        self.vertices = vertices
        self.in_sources = in_sources
        self.outputs = outputs
        self.m = sum(1 for slots in in_sources for s in slots if s[0] == "g")
        self.n = len(outputs)
        self.num_vertices = len(vertices)
        self._hash = hash((vertices, in_sources, outputs))
        self._key = None

    def __hash__(self):
        return self._hash

    def sort_key(self):
        if self._key is None:
            self._key = (
                self.num_vertices, self.m, self.n, self.vertices,
                tuple(tuple(_source_key(s) for s in slots)
                      for slots in self.in_sources),
                tuple(_source_key(o) for o in self.outputs))
        return self._key

    def __repr__(self):
        return render_dag(self)


ELEMENTARY_LABELS = ("b", "c", "r", "m")

_DAG_POOL: dict = {}


def _validate(vertices, in_sources, outputs):
    V = len(vertices)
    if V == 0:
        raise DagError("a dag needs at least one vertex (use EDGE for the identity)")
    for label, in_ar, out_ar in vertices:
        if out_ar < 1 or in_ar < 0:
            raise DagError("vertex arities must have out >= 1, in >= 0")
        if label in ELEMENTARY_LABELS and out_ar != 1:
            raise DagError("elementary label %r must have one output" % label)
    if len(in_sources) != V:
        raise DagError("one input-slot list per vertex required")
    g_seen = set()
    out_used = set()
    for v, slots in enumerate(in_sources):
        if len(slots) != vertices[v][1]:
            raise DagError("vertex %d expects %d input slots" % (v, vertices[v][1]))
        for src in slots:
            if src[0] == "g":
                if src[1] in g_seen:
                    raise DagError("graph input %d wired twice" % src[1])
                g_seen.add(src[1])
            else:
                _, u, j = src
                if not (0 <= u < V) or not (0 <= j < vertices[u][2]):
                    raise DagError("bad edge source %r" % (src,))
                if (u, j) in out_used:
                    raise DagError("vertex output (%d,%d) wired twice" % (u, j))
                out_used.add((u, j))
    if g_seen != set(range(len(g_seen))):
        raise DagError("graph inputs must be numbered 0..m-1 without gaps")
    for out in outputs:
        if out[0] != "v":
            raise DagError("graph outputs must read vertex outputs")
        _, u, j = out
        if not (0 <= u < V) or not (0 <= j < vertices[u][2]):
            raise DagError("bad graph output %r" % (out,))
        if (u, j) in out_used:
            raise DagError("vertex output (%d,%d) wired twice" % (u, j))
        out_used.add((u, j))
    for u in range(V):
        for j in range(vertices[u][2]):
            if (u, j) not in out_used:
                raise DagError("vertex output (%d,%d) left dangling; list it as "
                               "a graph output" % (u, j))
    # acyclicity (Kahn) over vertex-to-vertex edges
    succs = {u: [] for u in range(V)}
    indeg = {u: 0 for u in range(V)}
    for v, slots in enumerate(in_sources):
        for src in slots:
            if src[0] == "v":
                succs[src[1]].append(v)
                indeg[v] += 1
    frontier = [u for u in range(V) if indeg[u] == 0]
    seen = 0
    while frontier:
        u = frontier.pop()
        seen += 1
        for w in succs[u]:
            indeg[w] -= 1
            if indeg[w] == 0:
                frontier.append(w)
    if seen != V:
        raise DagError("dag contains an oriented cycle")
    # connectivity over the undirected edge relation
    parent = list(range(V))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v, slots in enumerate(in_sources):
        for src in slots:
            if src[0] == "v":
                parent[find(src[1])] = find(v)
    if len({find(u) for u in range(V)}) != 1:
        raise DagError("dag is disconnected")


def _canonical_order(vertices, in_sources, outputs):
    # breadth-first from the ordered graph outputs, walking input slots in
    # planar order; reaches every vertex since each has a path to an output
    order = []
    seen = set()

    def visit(u):
        if u not in seen:
            seen.add(u)
            order.append(u)

    for _, u, _j in outputs:
        visit(u)
    i = 0
    while i < len(order):
        for src in in_sources[order[i]]:
            if src[0] == "v":
                visit(src[1])
        i += 1
    return order


def mk_dag(vertices, in_sources, outputs) -> FlowDag:
    vertices = tuple(tuple(v) for v in vertices)
    in_sources = tuple(tuple(tuple(s) for s in slots) for slots in in_sources)
    outputs = tuple(tuple(o) for o in outputs)
    _validate(vertices, in_sources, outputs)
    order = _canonical_order(vertices, in_sources, outputs)
    rename = {old: new for new, old in enumerate(order)}

    def remap(src):
        return src if src[0] == "g" else ("v", rename[src[1]], src[2])

    vertices2 = tuple(vertices[old] for old in order)
    in_sources2 = tuple(tuple(remap(s) for s in in_sources[old])
                        for old in order)
    outputs2 = tuple(remap(o) for o in outputs)
    key = (vertices2, in_sources2, outputs2)
    try:
        return _DAG_POOL[key]
    except KeyError:
        return _DAG_POOL.setdefault(key, FlowDag(*key))


def vertex_dag(label: str, in_arity: int, out_arity: int = 1) -> FlowDag:
    """Single vertex with all flags dangling, inputs then outputs in order."""
    return mk_dag(((label, in_arity, out_arity),),
                  ((tuple(("g", k) for k in range(in_arity)),)),
                  tuple(("v", 0, j) for j in range(out_arity)))


def tree_to_dag(tree) -> "FlowDag":
    """Planar tree with free input flags, as a (num_flags, 1) dag."""
    if not isinstance(tree, PlanarTree):
        return EDGE
    vertices = []
    in_sources = []
    flag_no = [0]

    def walk(t: PlanarTree) -> int:
        slots = []
        my_id = len(vertices)
        vertices.append(None)
        in_sources.append(None)
        for inp in t.inputs:
            if isinstance(inp, PlanarTree):
                child = walk(inp)
                slots.append(("v", child, 0))
            else:
                slots.append(("g", flag_no[0]))
                flag_no[0] += 1
        vertices[my_id] = (t.label, len(slots), 1)
        in_sources[my_id] = tuple(slots)
        return my_id

    root = walk(tree)
    return mk_dag(vertices, in_sources, (("v", root, 0),))


# ---------------------------------------------------------------------------
# dag DSL and JSON
#
#   v1: b(2->1); v2: join(2->2)
#   v1.out1 -> v2.in1        edge between vertices (1-based slots)
#   in1 -> v1.in1            explicit graph input wiring
#   v2.out2 -> out1          explicit graph output wiring
#   unwired slots become graph inputs/outputs in declaration order;
#   the single statement "edge" denotes the identity wire.


def _parse_port(token: str, kind: str):
    name, _, slot = token.partition("." + kind)
    if not slot.isdigit() or not name:
        raise DagError("bad %s port %r" % (kind, token))
    return name, int(slot) - 1


def parse_dag(text: str):
    statements = [s.strip() for chunk in text.splitlines()
                  for s in chunk.split(";") if s.strip()]
    if statements == ["edge"]:
        return EDGE
    names = {}
    vertices = []
    vertex_lines = []
    edge_lines = []
    for stmt in statements:
        if ":" in stmt and "->" not in stmt.split(":", 1)[0]:
            name, decl = (part.strip() for part in stmt.split(":", 1))
            if name in names:
                raise DagError("vertex %r declared twice" % name)
            if "(" not in decl or not decl.endswith(")"):
                raise DagError("expected label(m->n) in %r" % stmt)
            label, args = decl[:-1].split("(", 1)
            ins, _, outs = args.partition("->")
            try:
                in_ar, out_ar = int(ins), int(outs)
            except ValueError:
                raise DagError("bad arity in %r" % stmt) from None
            names[name] = len(vertices)
            vertices.append((label.strip(), in_ar, out_ar))
            vertex_lines.append(name)
        else:
            edge_lines.append(stmt)
    slots = [[None] * v[1] for v in vertices]
    out_targets = {}
    explicit_inputs = {}
    explicit_outputs = {}
    for stmt in edge_lines:
        if "->" not in stmt:
            raise DagError("expected '->' in %r" % stmt)
        left, right = (part.strip() for part in stmt.split("->", 1))
        if left.startswith("in") and left[2:].isdigit():
            v, s = _parse_port(right, "in")
            explicit_inputs[int(left[2:]) - 1] = (names[v], s)
        elif right.startswith("out") and right[3:].isdigit():
            v, s = _parse_port(left, "out")
            explicit_outputs[int(right[3:]) - 1] = (names[v], s)
        else:
            u, j = _parse_port(left, "out")
            v, s = _parse_port(right, "in")
            u, v = names[u], names[v]
            if slots[v][s] is not None:
                raise DagError("input slot wired twice in %r" % stmt)
            if (u, j) in out_targets:
                raise DagError("output slot wired twice in %r" % stmt)
            slots[v][s] = ("v", u, j)
            out_targets[(u, j)] = (v, s)
    for k in sorted(explicit_inputs):
        v, s = explicit_inputs[k]
        if slots[v][s] is not None:
            raise DagError("input slot of in%d already wired" % (k + 1))
        slots[v][s] = ("g", k)
    next_g = len(explicit_inputs)
    for v in range(len(vertices)):
        for s in range(vertices[v][1]):
            if slots[v][s] is None:
                slots[v][s] = ("g", next_g)
                next_g += 1
    outputs = [explicit_outputs[k] for k in sorted(explicit_outputs)]
    outputs = [("v", u, j) for (u, j) in outputs]
    for u in range(len(vertices)):
        for j in range(vertices[u][2]):
            if (u, j) not in out_targets and ("v", u, j) not in outputs:
                outputs.append(("v", u, j))
    return mk_dag(vertices, slots, outputs)


def render_dag(dag) -> str:
    if dag is EDGE:
        return "edge"
    parts = []
    for v, (label, in_ar, out_ar) in enumerate(dag.vertices):
        parts.append("v%d: %s(%d->%d)" % (v + 1, label, in_ar, out_ar))
    for v, slots in enumerate(dag.in_sources):
        for s, src in enumerate(slots):
            if src[0] == "g":
                parts.append("in%d -> v%d.in%d" % (src[1] + 1, v + 1, s + 1))
            else:
                parts.append("v%d.out%d -> v%d.in%d"
                             % (src[1] + 1, src[2] + 1, v + 1, s + 1))
    for k, (_, u, j) in enumerate(dag.outputs):
        parts.append("v%d.out%d -> out%d" % (u + 1, j + 1, k + 1))
    return "; ".join(parts)


def dag_to_json(dag) -> dict:
    if dag is EDGE:
        return {"edge": True}
    return {
        "vertices": [{"label": l, "in": i, "out": o}
                     for (l, i, o) in dag.vertices],
        "inputs": [list(_find_input(dag, k)) for k in range(dag.m)],
        "edges": [[[src[1], src[2]], [v, s]]
                  for v, slots in enumerate(dag.in_sources)
                  for s, src in enumerate(slots) if src[0] == "v"],
        "outputs": [[u, j] for (_, u, j) in dag.outputs],
    }


def _find_input(dag, k):
    for v, slots in enumerate(dag.in_sources):
        for s, src in enumerate(slots):
            if src == ("g", k):
                return (v, s)
    raise DagError("graph input %d missing" % k)


def dag_from_json(obj: dict):
    if obj.get("edge"):
        return EDGE
    vertices = [(v["label"], v["in"], v["out"]) for v in obj["vertices"]]
    slots = [[None] * v[1] for v in vertices]
    for k, (v, s) in enumerate(obj.get("inputs", ())):
        slots[v][s] = ("g", k)
    for (u, j), (v, s) in obj.get("edges", ()):
        slots[v][s] = ("v", u, j)
    outputs = [("v", u, j) for (u, j) in obj.get("outputs", ())]
    return mk_dag(vertices, slots, outputs)


# ---------------------------------------------------------------------------
# linear combinations and composition


class ProperadElement:
    """Finite linear combination of (m,n) basis dags."""

    __slots__ = ("m", "n", "terms")

    def __init__(self, m: int, n: int, terms: dict):
        self.m = m
        self.n = n
        self.terms = {d: Fraction(c) for d, c in terms.items() if c}
        for dag in self.terms:
            if (dag.m, dag.n) != (m, n):
                raise ValueError("basis bi-arity (%d,%d) != element (%d,%d)"
                                 % (dag.m, dag.n, m, n))

    @classmethod
    def zero(cls, m: int, n: int) -> "ProperadElement":
        return cls(m, n, {})

    @classmethod
    def identity(cls, scalar=1) -> "ProperadElement":
        return cls(1, 1, {EDGE: Fraction(scalar)})

    @classmethod
    def from_dag(cls, dag, coef=1) -> "ProperadElement":
        return cls(dag.m, dag.n, {dag: Fraction(coef)})

    def is_zero(self) -> bool:
        return not self.terms

    def scale(self, scalar) -> "ProperadElement":
        scalar = Fraction(scalar)
        if scalar == 0:
            return ProperadElement.zero(self.m, self.n)
        return ProperadElement(self.m, self.n,
                               {d: c * scalar for d, c in self.terms.items()})

    def truncate_vertices(self, cutoff: int) -> "ProperadElement":
        return ProperadElement(self.m, self.n,
                               {d: c for d, c in self.terms.items()
                                if d.num_vertices <= cutoff})

    def min_vertices(self):
        return min((d.num_vertices for d in self.terms), default=None)

    def __add__(self, other: "ProperadElement") -> "ProperadElement":
        if (self.m, self.n) != (other.m, other.n):
            raise ValueError("bi-arity mismatch: (%d,%d) vs (%d,%d)"
                             % (self.m, self.n, other.m, other.n))
        out = dict(self.terms)
        for d, c in other.terms.items():
            out[d] = out.get(d, Fraction(0)) + c
        return ProperadElement(self.m, self.n, out)

    def __sub__(self, other: "ProperadElement") -> "ProperadElement":
        return self + other.scale(-1)

    def __eq__(self, other):
        return (isinstance(other, ProperadElement)
                and (self.m, self.n) == (other.m, other.n)
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.m, self.n, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        chunks = []
        for i, dag in enumerate(sorted(self.terms, key=lambda d: d.sort_key())):
            coef = self.terms[dag]
            body = "[%s]" % render_dag(dag)
            if abs(coef) != 1:
                body = "%s %s" % (abs(coef), body)
            if i == 0:
                chunks.append(body if coef > 0 else "-" + body)
            else:
                chunks.append((" + " if coef > 0 else " - ") + body)
        return "".join(chunks)


def _graft_dags(f, args):
    """Blockwise graft of basis dags; None when the composite disconnects."""
    if f is EDGE:
        return args[0]
    arg_vertex_offset = []
    arg_input_offset = []
    vertices = []
    in_sources = []
    total_inputs = 0
    for g in args:
        arg_vertex_offset.append(len(vertices))
        arg_input_offset.append(total_inputs)
        if g is EDGE:
            total_inputs += 1
            continue
        voff, goff = len(vertices), total_inputs
        for (label, i, o) in g.vertices:
            vertices.append((label, i, o))
        for slots in g.in_sources:
            in_sources.append(tuple(
                ("g", goff + s[1]) if s[0] == "g" else ("v", voff + s[1], s[2])
                for s in slots))
        total_inputs += g.m
    # f's input block boundaries, one block per argument
    block_of = []
    for idx, g in enumerate(args):
        block_of.extend([idx] * g.n)
    foff = len(vertices)
    for (label, i, o) in f.vertices:
        vertices.append((label, i, o))

    def feed(k):
        # the wire entering f's k-th graph input
        idx = block_of[k]
        g = args[idx]
        offset = k - sum(a.n for a in args[:idx])
        if g is EDGE:
            return ("g", arg_input_offset[idx])
        out = g.outputs[offset]
        return ("v", arg_vertex_offset[idx] + out[1], out[2])

    for slots in f.in_sources:
        in_sources.append(tuple(
            feed(s[1]) if s[0] == "g" else ("v", foff + s[1], s[2])
            for s in slots))
    outputs = tuple(("v", foff + u, j) for (_, u, j) in f.outputs)
    try:
        return mk_dag(vertices, in_sources, outputs)
    except DagError:
        return None


def properad_compose(f: ProperadElement, args) -> ProperadElement:
    """f composed with arguments whose output arities sum to f.m, blockwise
    left to right; disconnected composites are dropped (mapped to zero)."""
    args = tuple(args)
    if sum(g.n for g in args) != f.m:
        raise ValueError("argument outputs (%d) must sum to f inputs (%d)"
                         % (sum(g.n for g in args), f.m))
    out_m = sum(g.m for g in args)
    acc: dict = {}
    pools = [list(g.terms.items()) for g in args]
    for basis_f, coef_f in f.terms.items():
        stack = [((), coef_f)]
        for pool in pools:
            stack = [(chosen + (b,), c * cb) for chosen, c in stack
                     for b, cb in pool]
        for chosen, coef in stack:
            dag = _graft_dags(basis_f, chosen)
            if dag is not None:
                acc[dag] = acc.get(dag, Fraction(0)) + coef
    return ProperadElement(out_m, f.n, acc)


# ---------------------------------------------------------------------------
# the Dyson-Schwinger solver


class LambdaMatrix:
    """The operator with (i,j) entry 'compose with a_j beta_{j,i}' acting on
    vectors over the out-arity summands of fixed in-arity n."""

    __slots__ = ("n", "a", "beta")

    def __init__(self, n: int, a: FormalSeries, beta: dict):
        self.n = n
        self.a = a
        self.beta = beta

    def entry(self, i: int, j: int):
        return (self.a.coefficient(j), self.beta.get((j, i)))


def lambda_apply(lam: LambdaMatrix, vec: dict) -> dict:
    """vec maps j -> element of bi-arity (n, j); returns the image vector."""
    out = {}
    for i in range(1, lam.n + 1):
        acc = ProperadElement.zero(lam.n, i)
        for j, v in vec.items():
            if v.is_zero():
                continue
            if (v.m, v.n) != (lam.n, j):
                raise ValueError("vector slot %d has bi-arity (%d,%d)"
                                 % (j, v.m, v.n))
            a_j, beta_ji = lam.entry(i, j)
            if a_j == 0 or beta_ji is None or beta_ji.is_zero():
                continue
            acc = acc + properad_compose(beta_ji, [v]).scale(a_j)
        out[i] = acc
    return out


class ProperadSolution:
    """Bi-arity components of a truncated properadic solution."""

    __slots__ = ("components", "vertex_cutoff")

    def __init__(self, components: dict, vertex_cutoff: int):
        self.components = {k: v for k, v in components.items()
                           if not v.is_zero()}
        self.vertex_cutoff = vertex_cutoff

    def component(self, m: int, n: int) -> ProperadElement:
        if m < 1 or n < 1:
            raise ValueError("bi-arity indices start at 1")
        return self.components.get((m, n), ProperadElement.zero(m, n))

    def __repr__(self):
        lines = []
        for (m, n) in sorted(self.components):
            lines.append("x_{%d,%d} = %r" % (m, n, self.components[(m, n)]))
        return "\n".join(lines) or "0"


def _beta_split(beta: dict):
    """Separate the scalar multiple of EDGE inside beta_{1,1}; reject bare
    edges anywhere else (no graded inverse exists there)."""
    lam_scalar = Fraction(0)
    reduced = {}
    for key, element in beta.items():
        if not isinstance(key, tuple) or len(key) != 2:
            raise ValueError("beta keys must be (m, n) pairs")
        if (element.m, element.n) != key:
            raise ValueError("beta[%r] has bi-arity (%d,%d)"
                             % (key, element.m, element.n))
        if key == (1, 1):
            lam_scalar = element.terms.get(EDGE, Fraction(0))
            rest = ProperadElement(1, 1, {d: c for d, c in element.terms.items()
                                          if d is not EDGE})
            if not rest.is_zero():
                reduced[key] = rest
        else:
            if EDGE in element.terms:
                raise ValueError("unsupported inversion: identity component "
                                 "in beta[%r]" % (key,))
            if not element.is_zero():
                reduced[key] = element
    return lam_scalar, reduced


def _arity_bounds(beta: dict, cutoff: int):
    max_in = max_out = 1
    for element in beta.values():
        for dag in element.terms:
            if dag is EDGE:
                continue
            for (_, i, o) in dag.vertices:
                max_in = max(max_in, i)
                max_out = max(max_out, o)
    return (cutoff * (max_in - 1) + 1 if max_in > 1 else 1,
            cutoff * (max_out - 1) + 1 if max_out > 1 else 1)


def _monomials(components: dict, m: int, k: int, min_factors: int):
    """Tuples of solution components with in-arities summing to m and
    out-arities summing to k."""
    out = []
    top = min(m, k)
    for length in range(min_factors, top + 1):
        for j_parts in _compositions(m, length):
            for i_parts in _compositions(k, length):
                factors = []
                for j, i in zip(j_parts, i_parts):
                    x = components.get((j, i))
                    if x is None or x.is_zero():
                        break
                    factors.append(x)
                else:
                    out.append(tuple(factors))
    return out


def solve_properad_dse(a: FormalSeries, beta: dict,
                       vertex_cutoff: int) -> ProperadSolution:
    """Truncated solution of the properadic equation, graded by vertex count.

    The in-arity m blocks are solved in increasing order; inside a block the
    out-arities 1..m are coupled through LambdaMatrix and resolved by exact
    scalar inversion plus Neumann iteration (valid because every non-scalar
    beta term adds at least one vertex).  Components with n > m follow by
    substitution, with the series coefficient indexed by the in-arity of the
    beta component as in the block operator.
    """
    if vertex_cutoff < 0:
        raise ValueError("vertex cutoff must be >= 0")
    lam_scalar, reduced = _beta_split(beta)
    a1 = a.coefficient(1)
    if a1 * lam_scalar == 1:
        raise ValueError("non-invertible degree-1 operator")
    inv = 1 / (1 - a1 * lam_scalar)
    max_m, max_n = _arity_bounds(beta, vertex_cutoff)
    components: dict = {}
    for m in range(1, max_m + 1):
        lam = LambdaMatrix(m, a, reduced)
        w = {}
        for i in range(1, m + 1):
            acc = ProperadElement.zero(m, i)
            if (m, i) == (1, 1):
                acc = acc + ProperadElement.identity()
            for j in range(1, m + 1):
                a_j, beta_ji = lam.entry(i, j)
                if a_j == 0 or beta_ji is None:
                    continue
                for mono in _monomials(components, m, j, 2):
                    acc = acc + properad_compose(beta_ji, mono).scale(a_j)
            w[i] = acc.truncate_vertices(vertex_cutoff)

        # the edge part of beta_{1,1} maps slot 1 to itself in every block;
        # invert that scalar part exactly, the vertexful rest by iteration
        def unscale(vec):
            if lam_scalar:
                vec = dict(vec)
                vec[1] = vec[1].scale(inv)
            return vec

        y = unscale(w)
        for _ in range(vertex_cutoff + 1):
            image = lambda_apply(lam, y)
            y_next = {}
            for i in range(1, m + 1):
                y_next[i] = (w[i] + image[i]).truncate_vertices(vertex_cutoff)
            y_next = unscale(y_next)
            if y_next == y:
                break
            y = y_next
        for i in range(1, m + 1):
            if not y[i].is_zero():
                components[(m, i)] = y[i]
        for n in range(m + 1, max_n + 1):
            acc = ProperadElement.zero(m, n)
            for k in range(1, m + 1):
                a_k = a.coefficient(k)
                beta_kn = reduced.get((k, n))
                if a_k == 0 or beta_kn is None:
                    continue
                for mono in _monomials(components, m, k, 1):
                    acc = acc + properad_compose(beta_kn, mono).scale(a_k)
            acc = acc.truncate_vertices(vertex_cutoff)
            if not acc.is_zero():
                components[(m, n)] = acc
    return ProperadSolution(components, vertex_cutoff)


def verify_properad_dse(sol: ProperadSolution, a: FormalSeries, beta: dict,
                        max_in_arity: int = None):
    """Substitute the solution back into the block equations; None on pass,
    else the first failing bi-arity (m, n)."""
    lam_scalar, reduced = _beta_split(beta)
    cutoff = sol.vertex_cutoff
    max_m, max_n = _arity_bounds(beta, cutoff)
    if max_in_arity is not None:
        max_m = min(max_m, max_in_arity)
    components = {k: v for k, v in sol.components.items()}
    for m in range(1, max_m + 1):
        for n in range(1, max_n + 1):
            acc = ProperadElement.zero(m, n)
            if (m, n) == (1, 1):
                acc = acc + ProperadElement.identity()
            for j in range(1, m + 1):
                a_j = a.coefficient(j)
                if a_j == 0:
                    continue
                beta_jn = reduced.get((j, n))
                monos = _monomials(components, m, j, 1)
                for mono in monos:
                    if beta_jn is not None:
                        acc = acc + properad_compose(beta_jn, mono).scale(a_j)
                    if (j, n) == (1, 1) and lam_scalar:
                        acc = acc + mono[0].scale(a_j * lam_scalar)
            if acc.truncate_vertices(cutoff) != sol.component(m, n):
                return (m, n)
    return None


def subproperad_span(sol: ProperadSolution, m: int, n: int):
    """All compositions x_{k,n} o (x_{j_1,i_1} x ... x x_{j_l,i_l}) with the
    j's summing to m and the i's summing to k, truncated at the vertex
    cutoff (beyond it the truncated components give incomplete coefficients)."""
    out = []
    seen = set()
    for k in sorted({key[0] for key in sol.components}):
        outer = sol.component(k, n)
        if outer.is_zero():
            continue
        for mono in _monomials(sol.components, m, k, 1):
            x = properad_compose(outer, mono).truncate_vertices(sol.vertex_cutoff)
            if not x.is_zero() and x not in seen:
                seen.add(x)
                out.append(x)
    return out


def subproperad_closure_check(sol: ProperadSolution, max_m: int, max_n: int):
    """Compose spanning elements with component tuples and test membership in
    the spanning set of the result bi-arity; None on pass else a witness."""
    spans = {}
    for m in range(1, max_m + 1):
        for n in range(1, max_n + 1):
            spans[(m, n)] = subproperad_span(sol, m, n)
    for (m, n), span in spans.items():
        for f in span:
            for target_m in range(m, max_m + 1):
                for mono in _monomials(sol.components, target_m, m, 1):
                    result = properad_compose(f, mono)
                    result = result.truncate_vertices(sol.vertex_cutoff)
                    if result.is_zero():
                        continue
                    key = (result.m, result.n)
                    if key not in spans:
                        continue
                    generators = [x.terms for x in spans[key]]
                    if solve_linear_membership(
                            dict(result.terms), generators,
                            key_fn=lambda d: d.sort_key()) is None:
                        return (m, n, target_m)
    return None

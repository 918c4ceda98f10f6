"""Planar rooted trees with vertex labels, input flags, and ordered forests.

Trees come in three flavours sharing one structure:

* vertex-labeled trees: every input of a vertex is a child subtree,
* binary trees with external flags: every vertex has exactly two input
  slots, each either a child or a free flag,
* flag-decorated trees: free input slots carry opaque leaf labels
  (recursive-function expressions supplied by the recfun module).

All objects are immutable and hash-consed: construction goes through the
``mk_*`` factories which intern structurally equal values, so equality is
identity and hashing is O(1).  Interning relies on the GIL for safety.
"""

from __future__ import annotations

from fractions import Fraction

VERTEX_LABELS = ("b", "c", "r", "m")
_LABEL_INDEX = {lab: i for i, lab in enumerate(VERTEX_LABELS)}

MODES = ("nc", "comm")


class Flag:
    """A free (external) input slot, optionally labeled by an opaque value."""

    __slots__ = ("fn", "_hash")

    def __init__(self, fn):
        self.fn = fn
        self._hash = hash(("flag", fn))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return "#" if self.fn is None else "in(%s)" % (self.fn,)


_FLAG_POOL: dict = {}


def mk_flag(fn=None) -> Flag:
    try:
        return _FLAG_POOL[fn]
    except KeyError:
        flag = _FLAG_POOL.setdefault(fn, Flag(fn))
        return flag


FREE = mk_flag(None)


class PlanarTree:
    """A planar rooted tree; ``inputs`` mixes child subtrees and flags."""

    __slots__ = ("label", "inputs", "degree", "_hash", "_key", "_has_flags")

    def __init__(self, label, inputs):
        self.label = label
        self.inputs = inputs
        deg = 1
        has_flags = False
        for inp in inputs:
            if isinstance(inp, PlanarTree):
                deg += inp.degree
                has_flags = has_flags or inp._has_flags
            else:
                has_flags = True
        self.degree = deg
        self._has_flags = has_flags
        self._hash = hash((label, inputs))
        self._key = None

    def __hash__(self):
        return self._hash

    @property
    def children(self):
        return tuple(i for i in self.inputs if isinstance(i, PlanarTree))

    @property
    def flags(self):
        return tuple(i for i in self.inputs if isinstance(i, Flag))

    def has_flags(self) -> bool:
        return self._has_flags

    def num_flags(self) -> int:
        n = 0
        for inp in self.inputs:
            if isinstance(inp, PlanarTree):
                n += inp.num_flags()
            else:
                n += 1
        return n

    def sort_key(self):
        if self._key is None:
            parts = []
            for inp in self.inputs:
                if isinstance(inp, PlanarTree):
                    parts.append((1,) + inp.sort_key())
                else:
                    parts.append((0, "" if inp.fn is None else str(inp.fn)))
            self._key = (self.degree, _LABEL_INDEX.get(self.label, len(VERTEX_LABELS)),
                         tuple(parts))
        return self._key

    def __repr__(self):
        return render_tree(self)


_TREE_POOL: dict = {}


def mk_tree(label: str, inputs=()) -> PlanarTree:
    if label not in _LABEL_INDEX:
        raise ValueError("unknown vertex label %r (expected one of %s)"
                         % (label, "/".join(VERTEX_LABELS)))
    inputs = tuple(inputs)
    key = (label, inputs)
    try:
        return _TREE_POOL[key]
    except KeyError:
        return _TREE_POOL.setdefault(key, PlanarTree(label, inputs))


def mk_corolla(label: str) -> PlanarTree:
    """Bare single vertex in vertex-labeled mode (no inputs at all)."""
    return mk_tree(label, ())


def mk_binary_corolla(label: str) -> PlanarTree:
    """Single vertex with two free input flags (binary mode)."""
    return mk_tree(label, (FREE, FREE))


class Forest:
    """Ordered product of trees.  In commutative mode the order is canonical."""

    __slots__ = ("trees", "mode", "degree", "_hash", "_key")

    def __init__(self, trees, mode):
        self.trees = trees
        self.mode = mode
        self.degree = sum(t.degree for t in trees)
        self._hash = hash((trees, mode))
        self._key = None

    def __hash__(self):
        return self._hash

    def is_empty(self) -> bool:
        return not self.trees

    def sort_key(self):
        if self._key is None:
            self._key = (self.degree, tuple(t.sort_key() for t in self.trees))
        return self._key

    def __repr__(self):
        return render_forest(self)


_FOREST_POOL: dict = {}


def mk_forest(trees, mode: str = "nc") -> Forest:
    if mode not in MODES:
        raise ValueError("mode must be 'nc' or 'comm', got %r" % (mode,))
    trees = tuple(trees)
    if mode == "comm":
        trees = tuple(sorted(trees, key=PlanarTree.sort_key))
    key = (trees, mode)
    try:
        return _FOREST_POOL[key]
    except KeyError:
        return _FOREST_POOL.setdefault(key, Forest(trees, mode))


def empty_forest(mode: str = "nc") -> Forest:
    return mk_forest((), mode)


def canonicalize(forest: Forest) -> Forest:
    """Canonical form (identity in nc mode, sorted order in comm mode)."""
    return mk_forest(forest.trees, forest.mode)


def forest_product(a: Forest, b: Forest) -> Forest:
    if a.mode != b.mode:
        raise ValueError("cannot multiply forests of different modes")
    return mk_forest(a.trees + b.trees, a.mode)


def relabel_root(tree: PlanarTree, label: str) -> PlanarTree:
    return mk_tree(label, tree.inputs)


# ---------------------------------------------------------------------------
# enumeration of basis trees / forests


def _compositions(n: int, parts: int):
    # ordered tuples of `parts` positive integers summing to n
    if parts == 0:
        if n == 0:
            yield ()
        return
    if parts == 1:
        yield (n,)
        return
    for first in range(1, n - parts + 2):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def enumerate_trees(max_degree: int, labels=VERTEX_LABELS):
    """All vertex-labeled planar trees of degree 1..max_degree, by degree."""
    by_degree: dict[int, list] = {}
    for n in range(1, max_degree + 1):
        out = []
        if n == 1:
            for lab in labels:
                out.append(mk_tree(lab, ()))
        else:
            child_forests = []
            for k in range(1, n):
                for comp in _compositions(n - 1, k):
                    for combo in _tuple_product([by_degree[d] for d in comp]):
                        child_forests.append(combo)
            for lab in labels:
                for combo in child_forests:
                    out.append(mk_tree(lab, combo))
        by_degree[n] = out
    return by_degree


def _tuple_product(pools):
    if not pools:
        yield ()
        return
    head, *tail = pools
    for h in head:
        for rest in _tuple_product(tail):
            yield (h,) + rest


def enumerate_forests(max_degree: int, mode: str = "nc", labels=VERTEX_LABELS,
                      trees_by_degree=None):
    """All basis forests of degree 1..max_degree (canonical, deduplicated)."""
    if trees_by_degree is None:
        trees_by_degree = enumerate_trees(max_degree, labels)
    by_degree: dict[int, list] = {}
    for n in range(1, max_degree + 1):
        seen = set()
        out = []
        for k in range(1, n + 1):
            for comp in _compositions(n, k):
                for combo in _tuple_product([trees_by_degree[d] for d in comp]):
                    f = mk_forest(combo, mode)
                    if f not in seen:
                        seen.add(f)
                        out.append(f)
        by_degree[n] = out
    return by_degree


def enumerate_binary_trees(max_degree: int, labels=("b", "c", "r")):
    """Binary trees with external flags: every vertex has exactly two slots."""
    by_degree: dict[int, list] = {}
    for n in range(1, max_degree + 1):
        out = []
        if n == 1:
            for lab in labels:
                out.append(mk_tree(lab, (FREE, FREE)))
        else:
            for lab in labels:
                # (child, flag), (flag, child), (child, child)
                for t in by_degree[n - 1]:
                    out.append(mk_tree(lab, (t, FREE)))
                    out.append(mk_tree(lab, (FREE, t)))
                for d1 in range(1, n - 1):
                    for t1 in by_degree[d1]:
                        for t2 in by_degree[n - 1 - d1]:
                            out.append(mk_tree(lab, (t1, t2)))
        by_degree[n] = out
    return by_degree


# ---------------------------------------------------------------------------
# the tree DSL
#
#   tree    := label | label '(' input (',' input)* ')'
#   input   := tree | 'in' '(' recfun-expr ')' | '#' [digits]
#   forest  := '1' | tree ('*' tree)*
#   element := ['-'] term (('+'|'-') term)*
#   term    := [rational] forest


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__("%s at offset %d" % (message, offset))
        self.offset = offset


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            raise ParseError("expected %r" % ch, self.pos)
        self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def _parse_tree(sc: _Scanner, flag_parser) -> PlanarTree:
    sc.skip_ws()
    start = sc.pos
    ch = sc.peek()
    if ch == "i" and sc.text.startswith("in", sc.pos):
        raise ParseError("input flag not allowed at tree top level", start)
    if ch not in _LABEL_INDEX:
        raise ParseError("expected vertex label", sc.pos)
    label = ch
    sc.pos += 1
    if sc.peek() != "(":
        return mk_tree(label, ())
    sc.expect("(")
    inputs = []
    while True:
        inputs.append(_parse_input(sc, flag_parser))
        ch = sc.peek()
        if ch == ",":
            sc.pos += 1
            continue
        if ch == ")":
            sc.pos += 1
            break
        raise ParseError("expected ',' or ')'", sc.pos)
    return mk_tree(label, tuple(inputs))


def _parse_input(sc: _Scanner, flag_parser):
    ch = sc.peek()
    if ch == "#":
        sc.pos += 1
        digits = ""
        while sc.pos < len(sc.text) and sc.text[sc.pos].isdigit():
            digits += sc.text[sc.pos]
            sc.pos += 1
        # index markers are cosmetic; planar order defines the numbering
        return FREE
    if ch == "i" and sc.text.startswith("in", sc.pos):
        after = sc.pos + 2
        rest = sc.text[after:].lstrip()
        if rest.startswith("("):
            sc.pos = after
            sc.expect("(")
            if flag_parser is None:
                raise ParseError("flag labels are not accepted here", sc.pos)
            fn, consumed = flag_parser(sc.text, sc.pos)
            sc.pos = consumed
            sc.expect(")")
            return mk_flag(fn)
    return _parse_tree(sc, flag_parser)


def parse_tree(text: str, flag_parser=None) -> PlanarTree:
    sc = _Scanner(text)
    t = _parse_tree(sc, flag_parser)
    if not sc.at_end():
        raise ParseError("unexpected trailing input", sc.pos)
    return t


def _parse_forest(sc: _Scanner, mode: str, flag_parser) -> Forest:
    if sc.peek() == "1":
        sc.pos += 1
        return empty_forest(mode)
    trees = [_parse_tree(sc, flag_parser)]
    while sc.peek() == "*":
        sc.pos += 1
        trees.append(_parse_tree(sc, flag_parser))
    return mk_forest(trees, mode)


def parse_forest(text: str, mode: str = "nc", flag_parser=None) -> Forest:
    sc = _Scanner(text)
    f = _parse_forest(sc, mode, flag_parser)
    if not sc.at_end():
        raise ParseError("unexpected trailing input", sc.pos)
    return f


def _parse_rational(sc: _Scanner) -> Fraction:
    sc.skip_ws()
    start = sc.pos
    if sc.peek() == "-":
        sc.pos += 1
    while sc.pos < len(sc.text) and sc.text[sc.pos].isdigit():
        sc.pos += 1
    if sc.pos < len(sc.text) and sc.text[sc.pos] == "/":
        sc.pos += 1
        while sc.pos < len(sc.text) and sc.text[sc.pos].isdigit():
            sc.pos += 1
    try:
        return Fraction(sc.text[start:sc.pos])
    except (ValueError, ZeroDivisionError):
        raise ParseError("bad rational", start) from None


def parse_element_terms(text: str, mode: str = "nc", flag_parser=None):
    """Parse ``coef forest + coef forest ...`` into [(Forest, Fraction)]."""
    sc = _Scanner(text)
    terms = []
    if sc.at_end():
        raise ParseError("empty element", 0)
    if sc.peek() == "0" and sc.text.strip() == "0":
        return []
    sign = Fraction(1)
    if sc.peek() == "-":
        sc.pos += 1
        sign = Fraction(-1)
    while True:
        ch = sc.peek()
        if ch.isdigit() or ch == "-":
            coef = sign * _parse_rational(sc)
            sc.skip_ws()
            if sc.at_end() or sc.peek() in "+-":
                # a bare "1" denotes the empty forest with that coefficient
                terms.append((empty_forest(mode), coef))
            else:
                terms.append((_parse_forest(sc, mode, flag_parser), coef))
        else:
            terms.append((_parse_forest(sc, mode, flag_parser), sign))
        if sc.at_end():
            break
        ch = sc.peek()
        if ch == "+":
            sc.pos += 1
            sign = Fraction(1)
        elif ch == "-":
            sc.pos += 1
            sign = Fraction(-1)
        else:
            raise ParseError("expected '+' or '-'", sc.pos)
    return terms


def render_tree(tree: PlanarTree) -> str:
    if not tree.inputs:
        return tree.label
    flag_no = [0]

    def walk(t: PlanarTree) -> str:
        if not t.inputs:
            return t.label
        rendered = []
        for inp in t.inputs:
            if isinstance(inp, PlanarTree):
                rendered.append(walk(inp))
            elif inp.fn is None:
                flag_no[0] += 1
                rendered.append("#%d" % flag_no[0])
            else:
                rendered.append("in(%s)" % (inp.fn,))
        return "%s(%s)" % (t.label, ",".join(rendered))

    return walk(tree)


def render_forest(forest: Forest) -> str:
    if forest.is_empty():
        return "1"
    return "*".join(render_tree(t) for t in forest.trees)


def render_terms(terms) -> str:
    """Render [(Forest, Fraction)] sorted canonically; '' never returned."""
    items = sorted(terms, key=lambda fc: fc[0].sort_key())
    if not items:
        return "0"
    chunks = []
    for i, (forest, coef) in enumerate(items):
        mag = abs(coef)
        body = render_forest(forest)
        if mag != 1 or forest.is_empty():
            body = "%s %s" % (mag, body) if not forest.is_empty() else str(mag)
        if i == 0:
            chunks.append(body if coef > 0 else "-" + body)
        else:
            chunks.append((" + " if coef > 0 else " - ") + body)
    return "".join(chunks)


# ---------------------------------------------------------------------------
# JSON encoding (trees as nested {"label":..,"children":[..]}, flags as
# {"flag": true, "fn": <rendered-label-or-null>})


def tree_to_json(tree: PlanarTree) -> dict:
    children = []
    for inp in tree.inputs:
        if isinstance(inp, PlanarTree):
            children.append(tree_to_json(inp))
        else:
            children.append({"flag": True,
                             "fn": None if inp.fn is None else str(inp.fn)})
    return {"label": tree.label, "children": children}


def tree_from_json(obj: dict, flag_parser=None) -> PlanarTree:
    inputs = []
    for child in obj.get("children", ()):
        if child.get("flag"):
            fn = child.get("fn")
            if fn is not None:
                if flag_parser is None:
                    raise ValueError("flag labels are not accepted here")
                parsed, consumed = flag_parser(fn, 0)
                if fn[consumed:].strip():
                    raise ValueError("trailing input in flag label %r" % fn)
                fn = parsed
            inputs.append(mk_flag(fn))
        else:
            inputs.append(tree_from_json(child, flag_parser))
    return mk_tree(obj["label"], tuple(inputs))

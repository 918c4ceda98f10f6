"""Named scenario registry for the worked examples.

Each preset is a factory returning a plain dict so callers can pick the
pieces they need; the CLI and the acceptance tests share these definitions.
"""

from __future__ import annotations

from .dse import FormalSeries
from .grafting import BinaryGraft, CorollaGraft, SumGraft
from .properad import ProperadElement, vertex_dag
from .recfun import parse_recfun
from .renorm import FeynmanRule
from .trees import mk_flag, mk_tree, parse_tree
from .recfun import recfun_flag_parser


def bk_binary() -> dict:
    """Binary grafting summed over the labels b, c, r with P = (1+t)^2;
    X_1 is the three two-input corollas and X_2 the nine two-vertex trees
    with coefficient 2, child on the first input."""
    return {
        "kind": "dse",
        "P": FormalSeries.from_coefficients([2, 1], name="(1+t)^2"),
        "B": SumGraft([BinaryGraft(label) for label in ("b", "c", "r")]),
        "mode": "nc",
    }


def foissy_geometric() -> dict:
    """Corolla grafting with the geometric series; the solution generates a
    Hopf subalgebra (criterion parameters (alpha, beta) = (1, 1))."""
    return {
        "kind": "dse",
        "P": FormalSeries.geometric(),
        "B": CorollaGraft("b"),
        "mode": "nc",
    }


def properad_diagonal() -> dict:
    """Diagonal beta supported on (1,1) and (2,2), each a single vertex,
    with the geometric series; off-diagonal components vanish."""
    return {
        "kind": "properad",
        "a": FormalSeries.geometric(),
        "beta": {
            (1, 1): ProperadElement.from_dag(vertex_dag("b", 1, 1)),
            (2, 2): ProperadElement.from_dag(vertex_dag("join", 2, 2)),
        },
        "vertex_cutoff": 5,
    }


def halting_demo() -> dict:
    """Flagged charts exercising the halting Feynman rule: a diverging
    minimization (pole of order one), total charts with outputs 1 and 2
    (values pi^2/6 and pi^2/8), and a two-vertex chain whose counterterm
    needs the subdivergence."""
    diverging = parse_tree("m(in(comp(P[2,2];S)))", recfun_flag_parser)
    total_one = parse_tree("b(in(C[1]))", recfun_flag_parser)
    total_two = parse_tree("c(in(C[1]),in(S))", recfun_flag_parser)
    chain = mk_tree("b", (diverging, mk_flag(parse_recfun("C[1]"))))
    return {
        "kind": "renorm",
        "rule": FeynmanRule(mode="flagged", k=(), fuel=100000, eps=1e-7),
        "trees": {
            "diverging-mu": diverging,
            "total-one": total_one,
            "total-two": total_two,
            "chain": chain,
        },
    }


PRESETS = {
    "bk-binary": bk_binary,
    "foissy-geometric": foissy_geometric,
    "properad-diagonal": properad_diagonal,
    "halting-demo": halting_demo,
}


def load_preset(name: str) -> dict:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError("unknown preset %r; available: %s"
                         % (name, ", ".join(sorted(PRESETS)))) from None
    return factory()

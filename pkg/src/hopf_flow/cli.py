"""Command-line front end: parsing, solving, checking, evaluating,
renormalizing, with deterministic text and JSON output.

Exit codes: 0 success or check passed; 1 check ran and failed (witness
printed); 2 usage, parse, or domain errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .algebra import (AlgebraElement, TermBudgetExceeded, element_to_json,
                      tensor_to_json)
from .dse import (foissy_series_check, hopf_ideal_check, parse_multiseries,
                  parse_series, solve_dse, solve_dse_system,
                  subalgebra_closure_check, verify_dse, verify_dse_system)
from .grafting import (BinaryGraft, CorollaGraft, GraftError, cocycle_check,
                       parse_graft)
from .hopf import antipode, coproduct
from .operad import (delta_corolla, render_operad, solve_operad_dse,
                     verify_operad_dse)
from .presets import load_preset
from .properad import (DagError, ProperadElement, parse_dag,
                       solve_properad_dse, verify_properad_dse)
from .recfun import (AdmissibilityFailure, RecFunParseError, admissible_check,
                     attach_sigma, evaluate, parse_recfun, recfun_flag_parser,
                     render_recfun)
from .renorm import BPHZ, FeynmanRule, laurent_to_json
from .trees import (ParseError, parse_element_terms, parse_forest, parse_tree,
                    render_forest, render_terms, render_tree, tree_to_json)


def _meta(pairs) -> str:
    return "# " + " ".join("%s=%s" % (k, v) for k, v in pairs)


def _print_json(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _parse_tree_arg(text: str, flagged: bool):
    return parse_tree(text, recfun_flag_parser if flagged else None)


def _split_top(text: str, sep: str):
    """Split on sep at zero bracket depth, so 'P[1,2],S' -> ['P[1,2]', 'S']."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts if p.strip()]


# -- handlers


def _cmd_parse(args) -> int:
    flag_parser = recfun_flag_parser if args.flagged else None
    if args.tree is not None:
        tree = parse_tree(args.tree, flag_parser)
        if args.json:
            _print_json({"meta": {"mode": args.mode}, "tree": tree_to_json(tree)})
        else:
            print(_meta([("mode", args.mode)]))
            print(render_tree(tree))
        return 0
    if args.forest is not None:
        forest = parse_forest(args.forest, args.mode, flag_parser)
        if args.json:
            _print_json({"meta": {"mode": args.mode},
                         "forest": [tree_to_json(t) for t in forest.trees]})
        else:
            print(_meta([("mode", args.mode)]))
            print(render_forest(forest))
        return 0
    if args.element is not None:
        terms = parse_element_terms(args.element, args.mode, flag_parser)
        x = AlgebraElement.zero(args.mode)
        for forest, coef in terms:
            x = x + AlgebraElement.from_forest(forest, coef)
        if args.json:
            _print_json({"meta": {"mode": args.mode}, "element": element_to_json(x)})
        else:
            print(_meta([("mode", args.mode)]))
            print(render_terms(x.terms.items()))
        return 0
    raise ValueError("one of --tree, --forest, --element is required")


def _cmd_coproduct(args) -> int:
    tree = _parse_tree_arg(args.tree, args.flagged)
    delta = coproduct(AlgebraElement.from_tree(tree, args.mode))
    if args.json:
        _print_json({"meta": {"mode": args.mode}, "coproduct": tensor_to_json(delta)})
    else:
        print(_meta([("mode", args.mode)]))
        print(repr(delta))
    return 0


def _cmd_antipode(args) -> int:
    if args.tree is not None:
        x = AlgebraElement.from_tree(_parse_tree_arg(args.tree, args.flagged),
                                     args.mode)
    elif args.forest is not None:
        forest = parse_forest(args.forest, args.mode,
                              recfun_flag_parser if args.flagged else None)
        x = AlgebraElement.from_forest(forest)
    else:
        raise ValueError("one of --tree, --forest is required")
    s = antipode(x)
    if args.json:
        _print_json({"meta": {"mode": args.mode}, "antipode": element_to_json(s)})
    else:
        print(_meta([("mode", args.mode)]))
        print(render_terms(s.terms.items()))
    return 0


def _cmd_cocycle_check(args) -> int:
    op = parse_graft(args.graft)
    print(_meta([("graft", args.graft), ("cutoff", args.cutoff),
                 ("mode", args.mode)]))
    witness = cocycle_check(op, args.cutoff, args.mode)
    if witness is None:
        print("pass")
        return 0
    print("fail: cocycle identity breaks on forest %s"
          % render_forest(witness.forest))
    print("residual terms: %d" % len(witness.residual()))
    return 1


def _dse_setup(args):
    if args.preset:
        preset = load_preset(args.preset)
        if preset["kind"] != "dse":
            raise ValueError("preset %r is not a dse scenario" % args.preset)
        P, B, mode = preset["P"], preset["B"], preset["mode"]
    else:
        if args.series is None or args.graft is None:
            raise ValueError("need --preset, or both --series and --graft")
        P, B, mode = parse_series(args.series), parse_graft(args.graft), "nc"
    if args.mode:
        mode = args.mode
    return P, B, mode


def _print_solution(sol) -> None:
    for n in range(1, sol.cutoff + 1):
        print("x_%d = %s" % (n, repr(sol.component(n))))


def _cmd_dse_solve(args) -> int:
    P, B, mode = _dse_setup(args)
    print(_meta([("series", P.name or "custom"), ("graft", repr(B)),
                 ("cutoff", args.cutoff), ("mode", mode)]))
    sol = solve_dse(P, B, args.cutoff, mode)
    _print_solution(sol)
    return 0


def _cmd_dse_verify(args) -> int:
    P, B, mode = _dse_setup(args)
    print(_meta([("series", P.name or "custom"), ("graft", repr(B)),
                 ("cutoff", args.cutoff), ("mode", mode)]))
    sol = solve_dse(P, B, args.cutoff, mode)
    bad = verify_dse(sol, P, B)
    if bad is None:
        print("pass")
        return 0
    print("fail: degree %d" % bad)
    return 1


def _cmd_dse_check_hopf(args) -> int:
    P, B, mode = _dse_setup(args)
    print(_meta([("series", P.name or "custom"), ("graft", repr(B)),
                 ("cutoff", args.cutoff), ("mode", mode)]))
    criterion = foissy_series_check(P, max(args.cutoff, 3))
    if criterion is None:
        print("series criterion: none")
    else:
        print("series criterion: alpha=%s beta=%s" % criterion)
    sol = solve_dse(P, B, args.cutoff, mode)
    bad = subalgebra_closure_check(sol)
    if bad is None:
        print("subalgebra closure: pass")
        return 0
    print("subalgebra closure: fail at degree %d" % bad)
    return 1


def _cmd_dse_check_ideal(args) -> int:
    P, B, mode = _dse_setup(args)
    if args.mode is None:
        mode = "comm"
    print(_meta([("series", P.name or "custom"), ("graft", repr(B)),
                 ("cutoff", args.cutoff), ("mode", mode)]))
    sol = solve_dse(P, B, args.cutoff, mode)
    witness = hopf_ideal_check(sol.components, args.cutoff, mode)
    if witness is None:
        print("hopf ideal: pass")
        return 0
    print("hopf ideal: fail at degree %d" % witness.degree)
    return 1


def _cmd_dse_system(args) -> int:
    series = {name: parse_multiseries(getattr(args, name))
              for name in ("Fb", "Fc", "Fr")}
    if args.graft_kind == "corolla":
        factory = CorollaGraft
    else:
        factory = BinaryGraft
    print(_meta([("Fb", args.Fb), ("Fc", args.Fc), ("Fr", args.Fr),
                 ("graft", args.graft_kind), ("cutoff", args.cutoff),
                 ("mode", args.mode)]))
    sols = solve_dse_system(series["Fb"], series["Fc"], series["Fr"],
                            factory, args.cutoff, args.mode)
    for lab in ("b", "c", "r"):
        for n in range(1, args.cutoff + 1):
            print("x_%s[%d] = %s" % (lab, n, repr(sols[lab].component(n))))
    if args.verify:
        bad = verify_dse_system(sols, series["Fb"], series["Fc"], series["Fr"],
                                factory)
        if bad is not None:
            print("verify: fail at label %s degree %d" % bad)
            return 1
        print("verify: pass")
    return 0


def _parse_operad_beta(text: str) -> dict:
    beta = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        arity_text, _, label = chunk.partition(":")
        beta[int(arity_text)] = delta_corolla(label.strip(), int(arity_text))
    if not beta:
        raise ValueError("empty --beta specification")
    return beta


def _cmd_operad(args) -> int:
    a = parse_series(args.a)
    beta = _parse_operad_beta(args.beta)
    print(_meta([("a", a.name or "custom"), ("beta", args.beta),
                 ("arity", args.arity)]))
    sol = solve_operad_dse(a, beta, args.arity)
    for n in range(1, args.arity + 1):
        print("x_%d = %s" % (n, render_operad(sol.component(n))))
    if args.action == "verify":
        bad = verify_operad_dse(sol, a, beta)
        if bad is not None:
            print("verify: fail at arity %d" % bad)
            return 1
        print("verify: pass")
    return 0


def _parse_properad_beta(text: str) -> dict:
    beta = {}
    for chunk in text.split("|"):
        chunk = chunk.strip()
        if not chunk:
            continue
        key_text, _, dsl = chunk.partition(":")
        m_text, _, n_text = key_text.partition(",")
        key = (int(m_text), int(n_text))
        beta[key] = ProperadElement.from_dag(parse_dag(dsl))
    if not beta:
        raise ValueError("empty --beta specification")
    return beta


def _cmd_properad(args) -> int:
    if args.preset:
        preset = load_preset(args.preset)
        if preset["kind"] != "properad":
            raise ValueError("preset %r is not a properad scenario" % args.preset)
        a, beta = preset["a"], preset["beta"]
        cutoff = args.vertex_cutoff or preset["vertex_cutoff"]
    else:
        if args.a is None or args.beta is None:
            raise ValueError("need --preset, or both --a and --beta")
        a = parse_series(args.a)
        beta = _parse_properad_beta(args.beta)
        cutoff = args.vertex_cutoff or 4
    print(_meta([("a", a.name or "custom"), ("vertex-cutoff", cutoff)]))
    sol = solve_properad_dse(a, beta, cutoff)
    print(repr(sol))
    if args.action == "verify":
        bad = verify_properad_dse(sol, a, beta)
        if bad is not None:
            print("verify: fail at bi-arity (%d,%d)" % bad)
            return 1
        print("verify: pass")
    return 0


def _cmd_eval(args) -> int:
    expr = parse_recfun(args.expr)
    arg_values = tuple(int(v) for v in args.args.split(",") if v.strip()) \
        if args.args else ()
    print(_meta([("fuel", args.fuel)]))
    print(repr(evaluate(expr, arg_values, args.fuel)))
    return 0


def _cmd_flowchart(args) -> int:
    if args.sigma is not None:
        tree = parse_tree(args.tree)
        sigma = [parse_recfun(part) for part in _split_top(args.sigma, ",")]
        tree = attach_sigma(tree, sigma)
    else:
        tree = parse_tree(args.tree, recfun_flag_parser)
    print(_meta([("tree", args.tree)]))
    result = admissible_check(tree)
    if isinstance(result, AdmissibilityFailure):
        print(repr(result))
        return 1
    print("output: %s" % render_recfun(result))
    return 0


def _cmd_renorm(args) -> int:
    k = tuple(int(v) for v in args.k.split(",") if v.strip()) if args.k else ()
    rule = FeynmanRule(mode=args.mode, k=k, fuel=args.fuel, eps=args.eps,
                       sigma_cap=args.sigma_cap)
    tree = _parse_tree_arg(args.tree, rule.mode == "flagged")
    engine = BPHZ(rule)
    out = {
        "phi": laurent_to_json(engine.phi_tree(tree)),
        "phi_minus": laurent_to_json(engine.phi_minus_tree(tree)),
        "phi_plus": laurent_to_json(engine.phi_plus_tree(tree)),
        "fuel": rule.fuel,
        "eps": rule.eps,
    }
    _print_json(out)
    return 0


# -- parser


def _add_mode(p, default="nc"):
    p.add_argument("--mode", choices=("nc", "comm"), default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hopf-flow",
        description="Hopf/operad/properad flow-chart algebra toolkit")
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized property runs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and canonically render")
    p.add_argument("--tree")
    p.add_argument("--forest")
    p.add_argument("--element")
    p.add_argument("--flagged", action="store_true",
                   help="accept in(...) function labels on flags")
    p.add_argument("--json", action="store_true")
    _add_mode(p)
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("coproduct", help="coproduct by admissible cuts")
    p.add_argument("--tree", required=True)
    p.add_argument("--flagged", action="store_true")
    p.add_argument("--json", action="store_true")
    _add_mode(p)
    p.set_defaults(func=_cmd_coproduct)

    p = sub.add_parser("antipode", help="antipode of a tree or forest")
    p.add_argument("--tree")
    p.add_argument("--forest")
    p.add_argument("--flagged", action="store_true")
    p.add_argument("--json", action="store_true")
    _add_mode(p)
    p.set_defaults(func=_cmd_antipode)

    p = sub.add_parser("cocycle-check", help="Hochschild 1-cocycle check")
    p.add_argument("--graft", required=True)
    p.add_argument("--cutoff", type=int, required=True)
    _add_mode(p)
    p.set_defaults(func=_cmd_cocycle_check)

    dse = sub.add_parser("dse", help="combinatorial Dyson-Schwinger equations")
    dse_sub = dse.add_subparsers(dest="action", required=True)
    for action, func in (("solve", _cmd_dse_solve), ("verify", _cmd_dse_verify),
                         ("check-hopf", _cmd_dse_check_hopf),
                         ("check-ideal", _cmd_dse_check_ideal)):
        p = dse_sub.add_parser(action)
        p.add_argument("--preset")
        p.add_argument("--series")
        p.add_argument("--graft")
        p.add_argument("--cutoff", type=int, required=True)
        p.add_argument("--mode", choices=("nc", "comm"), default=None)
        p.set_defaults(func=func)
    p = dse_sub.add_parser("system")
    p.add_argument("--Fb", required=True)
    p.add_argument("--Fc", required=True)
    p.add_argument("--Fr", required=True)
    p.add_argument("--graft-kind", choices=("corolla", "binary"),
                   default="corolla")
    p.add_argument("--cutoff", type=int, required=True)
    p.add_argument("--verify", action="store_true")
    _add_mode(p)
    p.set_defaults(func=_cmd_dse_system)

    operad = sub.add_parser("operad", help="operadic Dyson-Schwinger equations")
    operad_sub = operad.add_subparsers(dest="action", required=True)
    for action in ("solve", "verify"):
        p = operad_sub.add_parser(action)
        p.add_argument("--a", required=True, help="series, e.g. geometric")
        p.add_argument("--beta", required=True,
                       help="delta-corolla spec, e.g. '2:b,3:c'")
        p.add_argument("--arity", type=int, required=True)
        p.set_defaults(func=_cmd_operad)

    properad = sub.add_parser("properad",
                              help="properadic Dyson-Schwinger equations")
    properad_sub = properad.add_subparsers(dest="action", required=True)
    for action in ("solve", "verify"):
        p = properad_sub.add_parser(action)
        p.add_argument("--preset")
        p.add_argument("--a")
        p.add_argument("--beta",
                       help="'m,n:<dag dsl>' entries joined by '|'")
        p.add_argument("--vertex-cutoff", type=int, default=None)
        p.set_defaults(func=_cmd_properad)

    p = sub.add_parser("eval", help="evaluate a recursive function with fuel")
    p.add_argument("--expr", required=True)
    p.add_argument("--args", default="")
    p.add_argument("--fuel", type=int, required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("flowchart", help="flow-chart admissibility and output")
    p.add_argument("--tree", required=True)
    p.add_argument("--sigma", default=None,
                   help="basic inputs for a vertex-labeled tree")
    p.set_defaults(func=_cmd_flowchart)

    p = sub.add_parser("renorm", help="BPHZ renormalization of a chart")
    p.add_argument("--tree", required=True)
    p.add_argument("--k", default="")
    p.add_argument("--fuel", type=int, default=100000)
    p.add_argument("--eps", type=float, default=1e-7)
    p.add_argument("--mode", choices=("flagged", "vertex"), default="flagged")
    p.add_argument("--sigma-cap", type=int, default=729)
    p.set_defaults(func=_cmd_renorm)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except (ParseError, RecFunParseError, DagError, GraftError, ValueError,
            TermBudgetExceeded) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

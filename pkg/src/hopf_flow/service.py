"""HTTP service exposing the core operations.

Thin wrapper: each endpoint parses its request model, calls the same
library functions the command line uses, and returns JSON built from
the canonical serializers.  Domain and parse errors map to HTTP 422;
check endpoints always return 200 with an "ok" flag and a witness.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .algebra import (AlgebraElement, TermBudgetExceeded, element_to_json,
                      tensor_to_json)
from .dse import (foissy_series_check, hopf_ideal_check, parse_series,
                  solve_dse, subalgebra_closure_check, verify_dse)
from .grafting import GraftError, cocycle_check, parse_graft
from .hopf import antipode, coproduct
from .operad import (operad_to_json, solve_operad_dse, verify_operad_dse)
from .presets import load_preset
from .properad import (DagError, ProperadElement, dag_to_json, parse_dag,
                       solve_properad_dse, verify_properad_dse)
from .recfun import (AdmissibilityFailure, Halted, RecFunParseError,
                     admissible_check, attach_sigma, evaluate, parse_recfun,
                     recfun_flag_parser, render_recfun)
from .renorm import BPHZ, FeynmanRule, laurent_to_json
from .trees import (ParseError, parse_forest, parse_tree, render_forest,
                    render_terms, render_tree, tree_to_json)

_DOMAIN_ERRORS = (ParseError, RecFunParseError, DagError, GraftError,
                  ValueError, TermBudgetExceeded)

app = FastAPI(title="hopf-flow", version="1.0.0")


def _split_top(text: str, sep: str):
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


def _guard(fn):
    try:
        return fn()
    except _DOMAIN_ERRORS as exc:
        raise HTTPException(status_code=422, detail=str(exc))


class ParseRequest(BaseModel):
    tree: Optional[str] = None
    forest: Optional[str] = None
    element: Optional[str] = None
    mode: str = "nc"
    flagged: bool = False


class TreeRequest(BaseModel):
    tree: str
    mode: str = "nc"
    flagged: bool = False


class CocycleRequest(BaseModel):
    graft: str
    cutoff: int
    mode: str = "nc"


class DseRequest(BaseModel):
    preset: Optional[str] = None
    series: Optional[str] = None
    graft: Optional[str] = None
    cutoff: int
    mode: Optional[str] = None


class OperadRequest(BaseModel):
    a: str
    beta: str
    arity: int


class ProperadRequest(BaseModel):
    preset: Optional[str] = None
    a: Optional[str] = None
    beta: Optional[str] = None
    vertex_cutoff: Optional[int] = None


class EvalRequest(BaseModel):
    expr: str
    args: str = ""
    fuel: int


class FlowchartRequest(BaseModel):
    tree: str
    sigma: Optional[str] = None


class RenormRequest(BaseModel):
    tree: str
    k: str = ""
    fuel: int = 100000
    eps: float = 1e-7
    mode: str = "flagged"
    sigma_cap: int = 729


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/parse")
def parse_endpoint(req: ParseRequest):
    def run():
        flag_parser = recfun_flag_parser if req.flagged else None
        if req.tree is not None:
            tree = parse_tree(req.tree, flag_parser)
            return {"rendered": render_tree(tree), "tree": tree_to_json(tree)}
        if req.forest is not None:
            forest = parse_forest(req.forest, req.mode, flag_parser)
            return {"rendered": render_forest(forest),
                    "forest": [tree_to_json(t) for t in forest.trees]}
        if req.element is not None:
            from .trees import parse_element_terms
            x = AlgebraElement.zero(req.mode)
            for forest, coef in parse_element_terms(req.element, req.mode,
                                                    flag_parser):
                x = x + AlgebraElement.from_forest(forest, coef)
            return {"rendered": render_terms(x.terms.items()),
                    "element": element_to_json(x)}
        raise ValueError("one of tree, forest, element is required")
    return _guard(run)


@app.post("/coproduct")
def coproduct_endpoint(req: TreeRequest):
    def run():
        flag_parser = recfun_flag_parser if req.flagged else None
        tree = parse_tree(req.tree, flag_parser)
        delta = coproduct(AlgebraElement.from_tree(tree, req.mode))
        return {"rendered": repr(delta), "coproduct": tensor_to_json(delta)}
    return _guard(run)


@app.post("/antipode")
def antipode_endpoint(req: TreeRequest):
    def run():
        flag_parser = recfun_flag_parser if req.flagged else None
        tree = parse_tree(req.tree, flag_parser)
        s = antipode(AlgebraElement.from_tree(tree, req.mode))
        return {"rendered": render_terms(s.terms.items()),
                "antipode": element_to_json(s)}
    return _guard(run)


@app.post("/cocycle-check")
def cocycle_endpoint(req: CocycleRequest):
    def run():
        witness = cocycle_check(parse_graft(req.graft), req.cutoff, req.mode)
        if witness is None:
            return {"ok": True}
        return {"ok": False,
                "witness_forest": render_forest(witness.forest),
                "residual_terms": len(witness.residual())}
    return _guard(run)


def _dse_setup(req: DseRequest):
    if req.preset:
        preset = load_preset(req.preset)
        if preset["kind"] != "dse":
            raise ValueError("preset %r is not a dse scenario" % req.preset)
        P, B, mode = preset["P"], preset["B"], preset["mode"]
    else:
        if req.series is None or req.graft is None:
            raise ValueError("need preset, or both series and graft")
        P, B, mode = parse_series(req.series), parse_graft(req.graft), "nc"
    if req.mode:
        mode = req.mode
    return P, B, mode


@app.post("/dse/solve")
def dse_solve_endpoint(req: DseRequest):
    def run():
        P, B, mode = _dse_setup(req)
        sol = solve_dse(P, B, req.cutoff, mode)
        return {"mode": mode,
                "components": {str(n): element_to_json(sol.component(n))
                               for n in range(1, req.cutoff + 1)}}
    return _guard(run)


@app.post("/dse/verify")
def dse_verify_endpoint(req: DseRequest):
    def run():
        P, B, mode = _dse_setup(req)
        sol = solve_dse(P, B, req.cutoff, mode)
        bad = verify_dse(sol, P, B)
        return {"ok": bad is None, "failed_degree": bad}
    return _guard(run)


@app.post("/dse/check-hopf")
def dse_check_hopf_endpoint(req: DseRequest):
    def run():
        P, B, mode = _dse_setup(req)
        criterion = foissy_series_check(P, max(req.cutoff, 3))
        sol = solve_dse(P, B, req.cutoff, mode)
        bad = subalgebra_closure_check(sol)
        return {"ok": bad is None,
                "series_criterion": None if criterion is None
                else {"alpha": str(criterion[0]), "beta": str(criterion[1])},
                "failed_degree": bad}
    return _guard(run)


@app.post("/dse/check-ideal")
def dse_check_ideal_endpoint(req: DseRequest):
    def run():
        P, B, mode = _dse_setup(req)
        if req.mode is None:
            mode = "comm"
        sol = solve_dse(P, B, req.cutoff, mode)
        witness = hopf_ideal_check(sol.components, req.cutoff, mode)
        return {"ok": witness is None,
                "failed_degree": None if witness is None else witness.degree}
    return _guard(run)


def _operad_beta(text: str) -> dict:
    from .operad import delta_corolla
    beta = {}
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        arity_text, _, label = chunk.partition(":")
        beta[int(arity_text)] = delta_corolla(label.strip(), int(arity_text))
    if not beta:
        raise ValueError("empty beta specification")
    return beta


@app.post("/operad/solve")
def operad_solve_endpoint(req: OperadRequest):
    def run():
        sol = solve_operad_dse(parse_series(req.a), _operad_beta(req.beta),
                               req.arity)
        return {"components": {str(n): operad_to_json(sol.component(n))
                               for n in range(1, req.arity + 1)}}
    return _guard(run)


@app.post("/operad/verify")
def operad_verify_endpoint(req: OperadRequest):
    def run():
        a, beta = parse_series(req.a), _operad_beta(req.beta)
        sol = solve_operad_dse(a, beta, req.arity)
        bad = verify_operad_dse(sol, a, beta)
        return {"ok": bad is None, "failed_arity": bad}
    return _guard(run)


def _properad_setup(req: ProperadRequest):
    if req.preset:
        preset = load_preset(req.preset)
        if preset["kind"] != "properad":
            raise ValueError("preset %r is not a properad scenario"
                             % req.preset)
        return (preset["a"], preset["beta"],
                req.vertex_cutoff or preset["vertex_cutoff"])
    if req.a is None or req.beta is None:
        raise ValueError("need preset, or both a and beta")
    beta = {}
    for chunk in _split_top(req.beta, "|"):
        key_text, _, dsl = chunk.partition(":")
        m_text, _, n_text = key_text.partition(",")
        beta[(int(m_text), int(n_text))] = \
            ProperadElement.from_dag(parse_dag(dsl))
    if not beta:
        raise ValueError("empty beta specification")
    return parse_series(req.a), beta, req.vertex_cutoff or 4


def _properad_json(sol):
    out = {}
    for (m, n) in sorted(sol.components):
        x = sol.components[(m, n)]
        out["%d,%d" % (m, n)] = [{"coef": str(c), "dag": dag_to_json(d)}
                                 for d, c in sorted(x.terms.items(),
                                                    key=lambda kv:
                                                    kv[0].sort_key())]
    return out


@app.post("/properad/solve")
def properad_solve_endpoint(req: ProperadRequest):
    def run():
        a, beta, cutoff = _properad_setup(req)
        sol = solve_properad_dse(a, beta, cutoff)
        return {"vertex_cutoff": cutoff, "components": _properad_json(sol)}
    return _guard(run)


@app.post("/properad/verify")
def properad_verify_endpoint(req: ProperadRequest):
    def run():
        a, beta, cutoff = _properad_setup(req)
        sol = solve_properad_dse(a, beta, cutoff)
        bad = verify_properad_dse(sol, a, beta)
        return {"ok": bad is None,
                "failed_bi_arity": None if bad is None else list(bad)}
    return _guard(run)


@app.post("/eval")
def eval_endpoint(req: EvalRequest):
    def run():
        expr = parse_recfun(req.expr)
        arg_values = tuple(int(v) for v in req.args.split(",") if v.strip()) \
            if req.args else ()
        result = evaluate(expr, arg_values, req.fuel)
        if isinstance(result, Halted):
            return {"rendered": repr(result), "halted": True,
                    "values": list(result.values)}
        return {"rendered": repr(result), "halted": False,
                "consumed": result.consumed}
    return _guard(run)


@app.post("/flowchart")
def flowchart_endpoint(req: FlowchartRequest):
    def run():
        if req.sigma is not None:
            tree = parse_tree(req.tree)
            sigma = [parse_recfun(p) for p in _split_top(req.sigma, ",")]
            tree = attach_sigma(tree, sigma)
        else:
            tree = parse_tree(req.tree, recfun_flag_parser)
        result = admissible_check(tree)
        if isinstance(result, AdmissibilityFailure):
            return {"admissible": False, "failure": repr(result)}
        return {"admissible": True, "output": render_recfun(result)}
    return _guard(run)


@app.post("/renorm")
def renorm_endpoint(req: RenormRequest):
    def run():
        k = tuple(int(v) for v in req.k.split(",") if v.strip()) \
            if req.k else ()
        rule = FeynmanRule(mode=req.mode, k=k, fuel=req.fuel, eps=req.eps,
                           sigma_cap=req.sigma_cap)
        flag_parser = recfun_flag_parser if rule.mode == "flagged" else None
        tree = parse_tree(req.tree, flag_parser)
        engine = BPHZ(rule)
        return {"phi": laurent_to_json(engine.phi_tree(tree)),
                "phi_minus": laurent_to_json(engine.phi_minus_tree(tree)),
                "phi_plus": laurent_to_json(engine.phi_plus_tree(tree)),
                "fuel": rule.fuel, "eps": rule.eps}
    return _guard(run)

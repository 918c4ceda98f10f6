"""End-to-end command-line checks: frozen display lines and exit codes.

Exit convention: 0 success or check passed, 1 check ran and failed,
2 usage, parse, or domain errors.
"""

import json

from hopf_flow.cli import main


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_coproduct_display(capsys):
    code, out, _ = run(["coproduct", "--tree", "b(c,r)"], capsys)
    assert code == 0
    assert out.splitlines() == [
        "# mode=nc",
        "1 (x) b(c,r) + c (x) b(r) + r (x) b(c) + c*r (x) b + b(c,r) (x) 1",
    ]


def test_antipode_display(capsys):
    code, out, _ = run(["antipode", "--tree", "b(c)"], capsys)
    assert code == 0
    assert out.splitlines()[-1] == "c*b - b(c)"


def test_parse_element_json(capsys):
    code, out, _ = run(
        ["parse", "--element", "2 b(c) + 1/3 r*m", "--mode", "comm", "--json"],
        capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["element"]["mode"] == "comm"
    coefs = sorted(term["coef"] for term in obj["element"]["terms"])
    assert coefs == ["1/3", "2"]


def test_coproduct_json(capsys):
    code, out, _ = run(["coproduct", "--tree", "b(c)", "--json"], capsys)
    assert code == 0
    obj = json.loads(out)
    terms = obj["coproduct"]["terms"]
    assert len(terms) == 3
    assert all(term["coef"] == "1" for term in terms)


def test_dse_solve_preset_display(capsys):
    code, out, _ = run(
        ["dse", "solve", "--preset", "bk-binary", "--cutoff", "2"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[1] == "x_1 = b(#1,#2) + c(#1,#2) + r(#1,#2)"
    assert lines[2] == ("x_2 = 2 b(b(#1,#2),#3) + 2 b(c(#1,#2),#3)"
                        " + 2 b(r(#1,#2),#3) + 2 c(b(#1,#2),#3)"
                        " + 2 c(c(#1,#2),#3) + 2 c(r(#1,#2),#3)"
                        " + 2 r(b(#1,#2),#3) + 2 r(c(#1,#2),#3)"
                        " + 2 r(r(#1,#2),#3)")


def test_dse_solve_byte_deterministic(capsys):
    first = run(["dse", "solve", "--preset", "bk-binary", "--cutoff", "3"],
                capsys)
    second = run(["dse", "solve", "--preset", "bk-binary", "--cutoff", "3"],
                 capsys)
    assert first == second


def test_dse_verify_pass(capsys):
    code, out, _ = run(
        ["dse", "verify", "--preset", "bk-binary", "--cutoff", "3"], capsys)
    assert code == 0
    assert out.splitlines()[-1] == "pass"


def test_dse_check_hopf_pass(capsys):
    code, out, _ = run(
        ["dse", "check-hopf", "--preset", "foissy-geometric", "--cutoff", "4"],
        capsys)
    assert code == 0
    assert "series criterion: alpha=1 beta=1" in out
    assert "subalgebra closure: pass" in out


def test_dse_check_hopf_fail(capsys):
    code, out, _ = run(
        ["dse", "check-hopf", "--series", "1+t2", "--graft", "corolla:b",
         "--cutoff", "5"], capsys)
    assert code == 1
    assert "series criterion: none" in out
    assert "subalgebra closure: fail at degree 3" in out


def test_dse_check_ideal_fail(capsys):
    code, out, _ = run(
        ["dse", "check-ideal", "--preset", "bk-binary", "--cutoff", "3"],
        capsys)
    assert code == 1
    assert out.splitlines()[-1] == "hopf ideal: fail at degree 2"


def test_dse_system_display_and_verify(capsys):
    code, out, _ = run(
        ["dse", "system", "--Fb", "1 + Xb Xc", "--Fc", "1 + Xr", "--Fr", "1",
         "--graft-kind", "corolla", "--cutoff", "3", "--verify"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert "x_b[1] = b" in lines
    assert "x_b[2] = 0" in lines
    assert "x_b[3] = b(b,c)" in lines
    assert "x_c[2] = c(r)" in lines
    assert lines[-1] == "verify: pass"


def test_cocycle_check_pass(capsys):
    code, out, _ = run(
        ["cocycle-check", "--graft", "corolla:b", "--cutoff", "3"], capsys)
    assert code == 0
    assert out.splitlines()[-1] == "pass"


def test_cocycle_check_fail_prints_witness(capsys):
    code, out, _ = run(
        ["cocycle-check", "--graft", "binary:b:first-input", "--cutoff", "3"],
        capsys)
    assert code == 1
    lines = out.splitlines()
    assert lines[-2] == ("fail: cocycle identity breaks on forest"
                         " b(#1,#2)*b(#1,#2)")
    assert lines[-1] == "residual terms: 2"


def test_operad_solve_and_verify(capsys):
    code, out, _ = run(
        ["operad", "verify", "--a", "geometric", "--beta", "2:b",
         "--arity", "4"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert "x_1 = id" in lines
    assert "x_2 = b(#1,#2)" in lines
    assert "x_3 = b(#1,b(#2,#3)) + b(b(#1,#2),#3)" in lines
    assert lines[-1] == "verify: pass"


def test_properad_solve_and_verify(capsys):
    code, out, _ = run(
        ["properad", "verify", "--preset", "properad-diagonal",
         "--vertex-cutoff", "2"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[1] == ("x_{1,1} = [edge]"
                        " + [v1: b(1->1); in1 -> v1.in1; v1.out1 -> out1]"
                        " + [v1: b(1->1); v2: b(1->1); v2.out1 -> v1.in1;"
                        " in1 -> v2.in1; v1.out1 -> out1]")
    assert lines[-1] == "verify: pass"


def test_eval_halted(capsys):
    code, out, _ = run(
        ["eval", "--expr",
         "comp(br(P[2,2],P[1,2]);rec(P[1,1];comp(P[3,3];S)))",
         "--args", "2,3", "--fuel", "10000"], capsys)
    assert code == 0
    assert out.splitlines() == ["# fuel=10000", "Halted(4)"]


def test_eval_out_of_fuel(capsys):
    code, out, _ = run(
        ["eval", "--expr", "mu(comp(P[2,2];S))", "--args", "1",
         "--fuel", "50"], capsys)
    assert code == 0
    assert out.splitlines()[-1] == "OutOfFuel(50)"


def test_flowchart_flagged_admissible(capsys):
    code, out, _ = run(["flowchart", "--tree", "b(in(S),in(S))"], capsys)
    assert code == 0
    assert out.splitlines()[-1] == "output: br(S,S)"


def test_flowchart_flagged_inadmissible(capsys):
    code, out, _ = run(
        ["flowchart", "--tree", "b(in(S),in(comp(P[2,2];S)))"], capsys)
    assert code == 1
    assert "inadmissible at root" in out
    assert "input arity" in out


def test_flowchart_sigma(capsys):
    code, out, _ = run(
        ["flowchart", "--tree", "r(m)", "--sigma", "S,P[1,2]"], capsys)
    assert code == 0
    assert out.splitlines()[-1] == "output: rec(mu(S);P[1,2])"


def test_renorm_json(capsys):
    code, out, _ = run(
        ["renorm", "--tree", "b(m(in(comp(P[2,2];S))),in(C[1]))"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["fuel"] == 100000 and obj["eps"] == 1e-7
    assert obj["phi"]["polar"]["1"] > 1.6
    assert obj["phi_minus"]["polar"]["2"] == obj["phi"]["polar"]["1"]
    assert obj["phi_plus"]["polar"] == {}


def test_parse_error_exits_2(capsys):
    code, _, err = run(["parse", "--tree", "b(c,"], capsys)
    assert code == 2
    assert err.startswith("error: ")


def test_unknown_preset_exits_2(capsys):
    code, _, err = run(
        ["dse", "solve", "--preset", "nope", "--cutoff", "2"], capsys)
    assert code == 2
    assert "unknown preset 'nope'" in err
    assert "bk-binary" in err


def test_usage_error_exits_2(capsys):
    code, _, err = run(["cocycle-check", "--graft", "corolla:b"], capsys)
    assert code == 2
    assert "--cutoff" in err


def test_missing_series_source_exits_2(capsys):
    code, _, err = run(
        ["dse", "check-hopf", "--series", "1+t2", "--cutoff", "5"], capsys)
    assert code == 2
    assert "need --preset" in err

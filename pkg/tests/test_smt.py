import random
from fractions import Fraction

import pytest

from wfsound import reach
from wfsound.smt.driver import SolverSession, solve_script
from wfsound.smt.script import SmtScript, emit_psi, emit_state_equation
from wfsound.smt.sexpr import parse_all, parse_value, to_text
from wfsound.smt.solver import SmtError, Solver
from wfsound.generators import gen_family

from util import diamond, random_workflow, random_marking


def run_solver(text: str):
    solver = Solver()
    out = []
    for cmd in parse_all(text):
        result = solver.execute(cmd)
        if result is not None:
            out.append(result)
    return solver, out


def test_sexpr_roundtrip():
    text = '(assert (= x (/ 1 3)) "a b" :kw)'
    node = parse_all(text)[0]
    assert parse_all(to_text(node))[0] == node
    assert parse_value(parse_all("(/ 1 3)")[0]) == Fraction(1, 3)
    assert parse_value(parse_all("(- (/ 7 2))")[0]) == Fraction(-7, 2)


def test_solver_sat_unsat_basics():
    _, out = run_solver("(assert false)(check-sat)")
    assert out == ["unsat"]
    _, out = run_solver(
        "(declare-const x Real)(assert (> x 0))(assert (< x 1))(check-sat)")
    assert out == ["sat"]
    _, out = run_solver(
        "(declare-const x Real)(assert (> x 0))(assert (< x 0))(check-sat)")
    assert out == ["unsat"]


def test_solver_model_values_exact():
    solver, out = run_solver(
        "(declare-const x Real)(declare-const b Bool)"
        "(assert (= (* 3 x) 1))(assert b)(check-sat)")
    assert out == ["sat"]
    values = solver.get_value(parse_all("(x b)")[0])
    assert "(/ 1 3)" in values and "true" in values


def test_solver_integer_sort():
    _, out = run_solver(
        "(declare-const k Int)(assert (> k 0))(assert (< (* 2 k) 5))"
        "(check-sat)")
    assert out == ["sat"]
    _, out = run_solver(
        "(declare-const k Int)(assert (> (* 2 k) 1))(assert (< (* 2 k) 2))"
        "(check-sat)")
    assert out == ["unsat"]


def test_solver_boolean_structure():
    _, out = run_solver(
        "(declare-const a Bool)(declare-const b Bool)"
        "(assert (xor a b))(assert (= a b))(check-sat)")
    assert out == ["unsat"]
    _, out = run_solver(
        "(declare-const x Real)"
        "(assert (ite (> x 0) (< x 1) (> x 5)))(assert (> x -1))(check-sat)")
    assert out == ["sat"]


def test_solver_push_pop():
    solver, _ = run_solver("(declare-const x Real)(assert (> x 1))")
    assert solver.execute(parse_all("(check-sat)")[0]) == "sat"
    solver.execute(parse_all("(push 1)")[0])
    solver.execute(parse_all("(assert (< x 0))")[0])
    assert solver.execute(parse_all("(check-sat)")[0]) == "unsat"
    solver.execute(parse_all("(pop 1)")[0])
    assert solver.execute(parse_all("(check-sat)")[0]) == "sat"


def test_solver_incremental_monotone():
    # assertions only accumulate between check-sat calls; verdicts must
    # track the growing system, and unsat must be permanent
    solver, _ = run_solver("(declare-const x Real)(declare-const y Real)")
    check = parse_all("(check-sat)")[0]
    solver.execute(parse_all("(assert (>= x 0))")[0])
    assert solver.execute(check) == "sat"
    solver.execute(parse_all("(assert (<= (+ x y) 3))")[0])
    assert solver.execute(check) == "sat"
    solver.execute(parse_all("(assert (>= y 4))")[0])
    assert solver.execute(check) == "unsat"
    solver.execute(parse_all("(assert (>= x 1))")[0])
    assert solver.execute(check) == "unsat"


def test_solver_quantifier_unknown():
    _, out = run_solver(
        "(declare-const x Real)"
        "(assert (forall ((y Real)) (> y x)))(check-sat)")
    assert out == ["unknown"]


def test_solver_no_model_after_unsat():
    solver, out = run_solver("(assert false)(check-sat)")
    assert out == ["unsat"]
    with pytest.raises(SmtError):
        solver.get_value(parse_all("(x)")[0])


def test_solve_script_subprocess():
    assert solve_script("(assert false)").status == "unsat"
    res = solve_script(
        "(declare-const x Real)(assert (= (* 2 x) 5))", values=["x"])
    assert res.status == "sat" and res.model["x"] == Fraction(5, 2)


def test_session_push_pop_and_values():
    with SolverSession() as session:
        session.send("(declare-const k Int)(assert (>= k 1))\n")
        session.push()
        session.send("(assert (<= k 0))\n")
        assert session.check_sat() == "unsat"
        session.pop()
        session.send("(assert (<= k 7))(assert (>= k 7))\n")
        assert session.check_sat() == "sat"
        assert session.get_values(["k"]) == {"k": 7}


def test_emit_psi_golden_queries():
    net = diamond()
    assert solve_script(emit_psi(net, {"i": 1}, {"f": 1})).status == "sat"
    assert solve_script(
        emit_psi(net, {"p1": 2}, {"p1": 2})).status == "sat"
    nq = gen_family("nquasi", 3)
    assert solve_script(emit_psi(nq, {"i": 1}, {"f": 1})).status == "unsat"


def test_emit_psi_matches_fixpoint_decision():
    # the level encoding and the saturation fixpoint must define the
    # same reachability relation
    rng = random.Random(23)
    for _ in range(40):
        net = random_workflow(rng)
        m = random_marking(rng, net.places)
        m2 = random_marking(rng, net.places)
        expected, _ = reach.decide_creach(net, m, m2)
        got = solve_script(emit_psi(net, m, m2)).status
        assert got == ("sat" if expected else "unsat")


def test_state_equation_integral():
    net = gen_family("nquasi", 3)
    script = SmtScript(logic="QF_LIA")
    script.declare("k", "Int")
    script.assert_("(>= k 1)")
    script.assert_("(<= k 40)")
    script.extend(emit_state_equation(net, {"i": "k"}, {"f": "k"},
                                      x_integral=True, prefix="z"))
    assert solve_script(script).status == "unsat"

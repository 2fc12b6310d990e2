import random
from fractions import Fraction
from itertools import combinations

from wfsound.linprog import (
    EQ, GE, LE, LT, LinearSystem, check_assignment, fm_project,
    lp_feasible, lp_maximize,
)


def _sys(variables, nonneg=None):
    return LinearSystem(list(variables), nonneg=set(nonneg or variables))


def test_trivial_feasible():
    sys = _sys(["x"])
    sys.add({"x": 1}, GE, 1)
    res = lp_feasible(sys)
    assert res.feasible and res.assignment["x"] >= 1
    assert check_assignment(sys, res.assignment)


def test_trivial_infeasible():
    sys = _sys(["x"])
    sys.add({"x": 1}, LE, -1)
    assert not lp_feasible(sys).feasible


def test_free_variables():
    sys = LinearSystem(["x", "y"], nonneg={"y"})
    sys.add({"x": 1, "y": 1}, EQ, -5)
    res = lp_feasible(sys)
    assert res.feasible
    assert check_assignment(sys, res.assignment)
    assert res.assignment["x"] + res.assignment["y"] == -5


def test_maximize_bounded_and_capped():
    sys = _sys(["x"])
    sys.add({"x": 1}, LE, 3)
    assert lp_maximize(sys, {"x": 1}, 10).optimum == 3
    free = _sys(["x"])
    assert lp_maximize(free, {"x": 1}, 1).optimum == 1


def test_maximize_objective_forced_above_cap():
    sys = _sys(["x"])
    sys.add({"x": 1}, GE, 5)
    res = lp_maximize(sys, {"x": 1}, 1)
    assert res.feasible and res.optimum == 1
    assert res.assignment["x"] >= 5


def test_maximize_infeasible():
    sys = _sys(["x"])
    sys.add({"x": 1}, LE, -2)
    assert lp_maximize(sys, {"x": 1}, 1).status == "infeasible"


def test_degenerate_redundant_equalities_terminate():
    sys = _sys(["x", "y", "z"])
    sys.add({"x": 1, "y": 1}, EQ, 1)
    sys.add({"x": 2, "y": 2}, EQ, 2)
    sys.add({"x": 3, "y": 3}, EQ, 3)
    sys.add({"x": 1, "y": 1, "z": 0}, LE, 1)
    sys.add({"z": 1}, LE, 0)
    res = lp_maximize(sys, {"x": 1, "z": 1}, 100)
    assert res.feasible and res.optimum == 1
    assert check_assignment(sys, res.assignment)


def test_exact_rationals():
    sys = _sys(["x", "y"])
    sys.add({"x": 3}, EQ, 1)
    sys.add({"x": 1, "y": 7}, EQ, 1)
    res = lp_feasible(sys)
    assert res.assignment["x"] == Fraction(1, 3)
    assert res.assignment["y"] == Fraction(2, 21)


def _vertex_oracle(sys: LinearSystem):
    """Feasibility by vertex enumeration; exact for systems where all
    variables are sign-constrained (the region is pointed)."""
    variables = list(sys.variables)
    n = len(variables)
    rows = [(coeffs, rhs) for coeffs, _, rhs in sys.constraints]
    rows += [({v: Fraction(1)}, Fraction(0)) for v in variables]
    for chosen in combinations(range(len(rows)), n):
        a = [[Fraction(rows[k][0].get(v, 0)) for v in variables] for k in chosen]
        b = [Fraction(rows[k][1]) for k in chosen]
        point = _solve_square(a, b)
        if point is None:
            continue
        assignment = dict(zip(variables, point))
        if check_assignment(sys, assignment):
            return True
    return False


def _solve_square(a, b):
    n = len(b)
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return None  # singular; skip this basis
        m[col], m[pivot] = m[pivot], m[col]
        m[col] = [v / m[col][col] for v in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def test_agreement_with_vertex_enumeration():
    rng = random.Random(7)
    rels = [LE, GE, EQ]
    for trial in range(120):
        n = rng.randint(1, 4)
        variables = [f"x{k}" for k in range(n)]
        sys = _sys(variables)
        for _ in range(rng.randint(1, 6)):
            coeffs = {v: rng.randint(-3, 3) for v in variables}
            sys.add(coeffs, rng.choice(rels), rng.randint(-4, 4))
        res = lp_feasible(sys)
        assert res.feasible == _vertex_oracle(sys), f"trial {trial}"
        if res.feasible:
            assert check_assignment(sys, res.assignment)


# ---------------------------------------------------------------------------
# Fourier-Motzkin

def _satisfies(constraints, point):
    for coeffs, rel, rhs in constraints:
        lhs = sum(Fraction(c) * Fraction(point.get(v, 0)) for v, c in coeffs.items())
        if rel == LE and not lhs <= rhs:
            return False
        if rel == LT and not lhs < rhs:
            return False
        if rel == EQ and lhs != rhs:
            return False
    return True


def test_fm_project_simple():
    cons = [
        ({"x": Fraction(1), "y": Fraction(1)}, LE, Fraction(2)),
        ({"y": Fraction(1)}, EQ, Fraction(1)),
    ]
    out = fm_project(cons, ["y"])
    assert _satisfies(out, {"x": 1})
    assert not _satisfies(out, {"x": 2})


def test_fm_project_strict():
    # 0 < y <= x and y >= 1 forces x >= 1 (and x > 0)
    cons = [
        ({"y": Fraction(-1)}, LT, Fraction(0)),
        ({"y": Fraction(1), "x": Fraction(-1)}, LE, Fraction(0)),
        ({"y": Fraction(-1)}, LE, Fraction(-1)),
    ]
    out = fm_project(cons, ["y"])
    assert _satisfies(out, {"x": 1})
    assert not _satisfies(out, {"x": Fraction(1, 2)})


def test_fm_project_equivalence_random():
    rng = random.Random(21)
    for trial in range(80):
        n = rng.randint(2, 4)
        variables = [f"x{k}" for k in range(n)]
        cons = []
        for _ in range(rng.randint(1, 5)):
            coeffs = {v: Fraction(rng.randint(-2, 2)) for v in variables}
            rel = rng.choice([LE, LE, EQ])
            cons.append((coeffs, rel, Fraction(rng.randint(-3, 3))))
        drop = rng.sample(variables, rng.randint(1, n - 1))
        keep = [v for v in variables if v not in drop]
        projected = fm_project(cons, drop)
        for _ in range(6):
            point = {v: Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for v in keep}
            # extension exists iff the projected system accepts the point
            ext = LinearSystem(list(variables), nonneg=set())
            for coeffs, rel, rhs in cons:
                ext.add(coeffs, LE if rel != EQ else EQ, rhs)
            for v in keep:
                ext.add({v: 1}, EQ, point[v])
            assert lp_feasible(ext).feasible == _satisfies(projected, point), \
                f"trial {trial}"

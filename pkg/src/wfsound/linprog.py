"""Exact rational linear programming.

A small two-phase tableau simplex over Fraction arithmetic with Bland's
rule for anti-cycling. There are no tolerances anywhere: feasibility and
optimality are exact, and every witness satisfies the constraints under
substitution. Also provides Fourier-Motzkin elimination for projecting
linear constraint systems onto a subset of their variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Mapping

LE, GE, EQ = "<=", ">=", "="
LT = "<"


@dataclass
class LinearSystem:
    """Linear constraints over named variables.

    Each constraint is (coeffs, relation, rhs) with relation one of
    "<=", "=", ">=". Variables listed in `nonneg` are constrained >= 0;
    the rest are free.
    """

    variables: list
    constraints: list = field(default_factory=list)
    nonneg: set = field(default_factory=set)

    def add(self, coeffs: Mapping, rel: str, rhs) -> None:
        if rel not in (LE, GE, EQ):
            raise ValueError(f"bad relation {rel!r}")
        for v in coeffs:
            if v not in self._varset():
                raise ValueError(f"undeclared variable {v!r}")
        self.constraints.append(
            ({v: Fraction(c) for v, c in coeffs.items() if c}, rel, Fraction(rhs)))

    def _varset(self):
        if not hasattr(self, "_vs") or len(self._vs) != len(self.variables):
            self._vs = set(self.variables)
        return self._vs


@dataclass
class LpResult:
    status: str  # "feasible" | "infeasible" | "unbounded"
    assignment: dict | None = None
    optimum: Fraction | None = None

    @property
    def feasible(self):
        return self.status == "feasible"


def check_assignment(sys: LinearSystem, assignment: Mapping) -> bool:
    """Exact substitution check of a candidate solution."""
    for v in sys.nonneg:
        if Fraction(assignment.get(v, 0)) < 0:
            return False
    for coeffs, rel, rhs in sys.constraints:
        lhs = sum(c * Fraction(assignment.get(v, 0)) for v, c in coeffs.items())
        ok = lhs <= rhs if rel == LE else lhs >= rhs if rel == GE else lhs == rhs
        if not ok:
            return False
    return True


def lp_feasible(sys: LinearSystem) -> LpResult:
    """Decide feasibility; a feasible result carries an exact witness."""
    tab = _Tableau(sys)
    if not tab.phase1():
        return LpResult("infeasible")
    return LpResult("feasible", assignment=tab.extract())


def lp_maximize(sys: LinearSystem, objective: Mapping, cap) -> LpResult:
    """Maximize the objective subject to sys; the reported optimum is
    min(cap, sup).

    The cap guarantees termination of phase 2. When every solution
    exceeds the cap the optimum is reported as cap and the witness is
    an arbitrary solution (whose value then exceeds the cap); otherwise
    the witness attains the optimum.
    """
    capped = LinearSystem(list(sys.variables), list(sys.constraints), set(sys.nonneg))
    capped.add(objective, LE, cap)
    tab = _Tableau(capped)
    if not tab.phase1():
        base = lp_feasible(sys)
        if not base.feasible:
            return LpResult("infeasible")
        # feasible, but the objective is forced above the cap everywhere
        return LpResult("feasible", assignment=base.assignment,
                        optimum=Fraction(cap))
    unbounded = tab.phase2({v: Fraction(c) for v, c in objective.items()})
    if unbounded:
        # cannot happen with the cap in place
        return LpResult("unbounded")
    assignment = tab.extract()
    value = sum(Fraction(c) * assignment.get(v, Fraction(0))
                for v, c in objective.items())
    return LpResult("feasible", assignment=assignment, optimum=value)


def lp_supremum(sys: LinearSystem, objective: Mapping) -> LpResult:
    """Maximize without a cap; status "unbounded" when the objective is
    unbounded above (then no witness is reported)."""
    tab = _Tableau(sys)
    if not tab.phase1():
        return LpResult("infeasible")
    if tab.phase2({v: Fraction(c) for v, c in objective.items()}):
        return LpResult("unbounded")
    assignment = tab.extract()
    value = sum(Fraction(c) * assignment.get(v, Fraction(0))
                for v, c in objective.items())
    return LpResult("feasible", assignment=assignment, optimum=value)


class _Tableau:
    """Standard-form simplex tableau with Bland's rule.

    Free variables are split into positive and negative parts; rows are
    equalities with slack/surplus columns, right-hand sides nonnegative.
    Rows are stored as integer vectors with one positive denominator
    per row (entry value N[r][j] / D[r], right-hand side b[r] / D[r]),
    so pivots are integer multiply-subtracts with a single gcd
    normalization per row.
    """

    def __init__(self, sys: LinearSystem):
        self.sys = sys
        nonneg = sys.nonneg
        self.cols = []       # (kind, payload); kinds: pos, neg, slack, art
        self.col_of_pos = {}
        self.col_of_neg = {}
        for v in sys.variables:
            self.col_of_pos[v] = len(self.cols)
            self.cols.append(("pos", v))
            if v not in nonneg:
                self.col_of_neg[v] = len(self.cols)
                self.cols.append(("neg", v))
        rows, rhs, scales = [], [], []
        self.slack_col = {}
        for coeffs, rel, b in sys.constraints:
            b = Fraction(b)
            scale = b.denominator
            for c in coeffs.values():
                scale = scale * c.denominator // gcd(scale, c.denominator)
            row = [0] * len(self.cols)
            for v, c in coeffs.items():
                ci = int(c * scale)
                row[self.col_of_pos[v]] += ci
                if v in self.col_of_neg:
                    row[self.col_of_neg[v]] -= ci
            if rel == LE:
                row.append(scale)
            elif rel == GE:
                row.append(-scale)
            if rel != EQ:
                self.slack_col[len(rows)] = len(self.cols)
                self.cols.append(("slack", len(rows)))
            rows.append(row)
            rhs.append(int(b * scale))
            scales.append(scale)
        width = len(self.cols)
        self.N, self.b, self.D = [], [], []
        for row, r, scale in zip(rows, rhs, scales):
            row.extend([0] * (width - len(row)))
            if r < 0:
                row = [-c for c in row]
                r = -r
            self.N.append(row)
            self.b.append(r)
            self.D.append(scale)
        self.basis = []

    def phase1(self) -> bool:
        n = len(self.N)
        art_cols = []
        self.unit_col = {}
        for k in range(n):
            # a slack with coefficient +1 serves as the starting basic
            # variable; only the other rows need artificials
            scol = self.slack_col.get(k)
            if scol is not None and self.N[k][scol] == self.D[k]:
                self.basis.append(scol)
                self.unit_col[k] = scol
                continue
            col = len(self.cols)
            self.cols.append(("art", k))
            art_cols.append(col)
            for j in range(n):
                self.N[j].append(self.D[j] if j == k else 0)
            self.basis.append(col)
            self.unit_col[k] = col
        if not art_cols:
            self.art = set()
            return True
        cost = [Fraction(0)] * len(self.cols)
        for c in art_cols:
            cost[c] = Fraction(-1)
        value = self._optimize(cost)
        if value != 0:
            return False
        # drive remaining artificials out of the basis
        for k in range(n):
            if self.cols[self.basis[k]][0] != "art":
                continue
            pivot_col = next(
                (j for j in range(len(self.cols))
                 if self.cols[j][0] != "art" and self.N[k][j]), None)
            if pivot_col is None:
                continue  # redundant row, harmless
            self._pivot(k, pivot_col)
        self.art = set(art_cols)
        return True

    def phase2(self, objective: Mapping) -> bool:
        """Maximize; returns True iff unbounded."""
        cost = [Fraction(0)] * len(self.cols)
        for v, c in objective.items():
            cost[self.col_of_pos[v]] += c
            if v in self.col_of_neg:
                cost[self.col_of_neg[v]] -= c
        try:
            self._optimize(cost, forbid=getattr(self, "art", set()))
        except _Unbounded:
            return True
        return False

    def _optimize(self, cost, forbid=frozenset()):
        # integer reduced costs: scale the cost vector once, then fold
        # the active basic rows over their denominator lcm; only the
        # sign matters for the entering choice
        scale = 1
        for c in cost:
            scale = scale * c.denominator // gcd(scale, c.denominator)
        base = [int(c * scale) for c in cost]
        while True:
            active = [(int(cost[self.basis[r]] * scale), r)
                      for r in range(len(self.N)) if cost[self.basis[r]]]
            lcm = 1
            for _, r in active:
                d = self.D[r]
                lcm = lcm * d // gcd(lcm, d)
            red = [c * lcm for c in base]
            for cb, r in active:
                mult = cb * (lcm // self.D[r])
                row = self.N[r]
                for j in range(len(red)):
                    if row[j]:
                        red[j] -= mult * row[j]
            enter = next(
                (j for j in range(len(self.cols))  # Bland: lowest index
                 if j not in forbid and red[j] > 0), None)
            if enter is None:
                return sum(cost[self.basis[r]] * Fraction(self.b[r], self.D[r])
                           for _, r in active)
            leave, bb, bn = None, None, None   # best ratio bb/bn
            for r in range(len(self.N)):
                n = self.N[r][enter]
                if n > 0:
                    b = self.b[r]
                    cmp = None if leave is None else b * bn - bb * n
                    if leave is None or cmp < 0 or (
                            cmp == 0 and self.basis[r] < self.basis[leave]):
                        leave, bb, bn = r, b, n
            if leave is None:
                raise _Unbounded
            self._pivot(leave, enter)

    def _pivot(self, k, j):
        piv = self.N[k][j]
        if piv < 0:
            self.N[k] = [-x for x in self.N[k]]
            self.b[k] = -self.b[k]
            piv = -piv
        # row k := row k / pivot value, keeping the denominator positive
        self.N[k], self.b[k], self.D[k] = \
            self._normalized(self.N[k], self.b[k], piv)
        pk, bk, dk = self.N[k], self.b[k], self.D[k]
        for r in range(len(self.N)):
            if r == k:
                continue
            f = self.N[r][j]
            if not f:
                continue
            self.N[r] = [a * dk - f * c for a, c in zip(self.N[r], pk)]
            self.N[r], self.b[r], self.D[r] = self._normalized(
                self.N[r], self.b[r] * dk - f * bk, self.D[r] * dk)
        self.basis[k] = j

    @staticmethod
    def _normalized(nums, b, d):
        g = gcd(gcd(d, abs(b)), *map(abs, nums)) if nums else gcd(d, abs(b))
        if g > 1:
            return [x // g for x in nums], b // g, d // g
        return nums, b, d

    def duals(self, cost) -> list:
        """Row multipliers y = c_B B^-1, read off the unit columns that
        started each row's basis (its +1 slack or its artificial)."""
        active = [(self.basis[r], r) for r in range(len(self.N))
                  if cost[self.basis[r]]]
        y = []
        for k in range(len(self.N)):
            u = self.unit_col[k]
            y.append(sum(cost[b] * Fraction(self.N[r][u], self.D[r])
                         for b, r in active))
        return y

    def extract(self) -> dict:
        values = {}
        for k, bcol in enumerate(self.basis):
            kind, payload = self.cols[bcol]
            if kind == "pos":
                values[payload] = values.get(payload, Fraction(0)) \
                    + Fraction(self.b[k], self.D[k])
            elif kind == "neg":
                values[payload] = values.get(payload, Fraction(0)) \
                    - Fraction(self.b[k], self.D[k])
        return {v: values.get(v, Fraction(0)) for v in self.sys.variables}


def lp_probe(sys: LinearSystem, objective=None):
    """One simplex run answering feasibility (or the supremum of an
    objective) together with a refutation certificate.

    Returns (LpResult, refuted) where refuted is None except when the
    system is infeasible (then it indexes an infeasible subsystem) or
    the optimum is <= 0 (then a subsystem over which the objective
    cannot exceed 0). Certificates are the nonzero support of the
    simplex dual multipliers; by weak duality they stay valid for the
    subsystem alone.
    """
    tab = _Tableau(sys)
    if not tab.phase1():
        cost = [Fraction(-1) if kind == "art" else Fraction(0)
                for kind, _ in tab.cols]
        return LpResult("infeasible"), \
            [k for k, v in enumerate(tab.duals(cost)) if v]
    if objective is None:
        return LpResult("feasible", assignment=tab.extract()), None
    if tab.phase2({v: Fraction(c) for v, c in objective.items()}):
        return LpResult("unbounded"), None
    assignment = tab.extract()
    value = sum(Fraction(c) * assignment.get(v, Fraction(0))
                for v, c in objective.items())
    res = LpResult("feasible", assignment=assignment, optimum=value)
    if value > 0:
        return res, None
    cost = [Fraction(0)] * len(tab.cols)
    for v, c in objective.items():
        cost[tab.col_of_pos[v]] += Fraction(c)
        if v in tab.col_of_neg:
            cost[tab.col_of_neg[v]] -= Fraction(c)
    return res, [k for k, v in enumerate(tab.duals(cost)) if v]


def lp_refutation(sys: LinearSystem, objective=None):
    """Indices of a constraint subsystem certifying a refutation.

    Without an objective: an infeasible subsystem, or None when sys is
    feasible. With an objective: a subsystem over which the objective
    cannot exceed 0, or None when the optimum does. The certificate is
    the nonzero support of the simplex dual multipliers; by weak
    duality it stays valid for the subsystem alone.
    """
    tab = _Tableau(sys)
    if not tab.phase1():
        cost = [Fraction(-1) if kind == "art" else Fraction(0)
                for kind, _ in tab.cols]
        return [k for k, v in enumerate(tab.duals(cost)) if v]
    if objective is None:
        return None
    if tab.phase2({v: Fraction(c) for v, c in objective.items()}):
        return None
    assignment = tab.extract()
    value = sum(Fraction(c) * assignment.get(v, Fraction(0))
                for v, c in objective.items())
    if value > 0:
        return None
    cost = [Fraction(0)] * len(tab.cols)
    for v, c in objective.items():
        cost[tab.col_of_pos[v]] += Fraction(c)
        if v in tab.col_of_neg:
            cost[tab.col_of_neg[v]] -= Fraction(c)
    return [k for k, v in enumerate(tab.duals(cost)) if v]


class _Unbounded(Exception):
    pass


# ---------------------------------------------------------------------------
# Fourier-Motzkin projection

def fm_project(constraints, eliminate):
    """Project a linear constraint system onto the remaining variables.

    constraints: list of (coeffs, rel, rhs) with rel in {"<=", "<", "="}.
    Returns an equivalent list over variables not in `eliminate`, with
    relations "<=" or "<" only (equalities are used for substitution
    first, then turned into inequality pairs if still present).
    """
    elim = list(eliminate)
    cons = [({v: Fraction(c) for v, c in coeffs.items() if c}, rel, Fraction(rhs))
            for coeffs, rel, rhs in constraints]
    for v in elim:
        cons = _eliminate_one(cons, v)
    out = []
    for coeffs, rel, rhs in cons:
        if rel == EQ:
            out.append((dict(coeffs), LE, rhs))
            out.append(({k: -c for k, c in coeffs.items()}, LE, -rhs))
        else:
            out.append((coeffs, rel, rhs))
    return _dedupe(out)


def _eliminate_one(cons, v):
    # prefer substitution through an equality mentioning v
    for idx, (coeffs, rel, rhs) in enumerate(cons):
        if rel == EQ and coeffs.get(v):
            cv = coeffs[v]
            expr = {k: -c / cv for k, c in coeffs.items() if k != v}
            const = rhs / cv  # v = const + expr
            out = []
            for j, (c2, r2, b2) in enumerate(cons):
                if j == idx:
                    continue
                cv2 = c2.get(v, Fraction(0))
                if not cv2:
                    out.append((c2, r2, b2))
                    continue
                merged = {k: c for k, c in c2.items() if k != v}
                for k, c in expr.items():
                    merged[k] = merged.get(k, Fraction(0)) + cv2 * c
                out.append(({k: c for k, c in merged.items() if c}, r2, b2 - cv2 * const))
            return out
    uppers, lowers, rest = [], [], []
    for coeffs, rel, rhs in cons:
        cv = coeffs.get(v, Fraction(0))
        if not cv:
            rest.append((coeffs, rel, rhs))
            continue
        norm = {k: c / abs(cv) for k, c in coeffs.items() if k != v}
        (uppers if cv > 0 else lowers).append((norm, rel, rhs / abs(cv)))
    for ucoef, urel, urhs in uppers:          # v <= urhs - u·x
        for lcoef, lrel, lrhs in lowers:      # v >= l·x - lrhs
            coeffs = dict(ucoef)
            for k, c in lcoef.items():
                coeffs[k] = coeffs.get(k, Fraction(0)) + c
            rel = LT if LT in (urel, lrel) else LE
            rest.append(({k: c for k, c in coeffs.items() if c}, rel, urhs + lrhs))
    return rest


def _dedupe(cons):
    seen, out = set(), []
    for coeffs, rel, rhs in cons:
        if not coeffs:
            if (rel == LE and rhs >= 0) or (rel == LT and rhs > 0):
                continue  # trivially true
        scale = None
        for k in sorted(coeffs):
            scale = abs(coeffs[k])
            break
        if scale:
            key = (tuple(sorted((k, c / scale) for k, c in coeffs.items())),
                   rel, rhs / scale)
        else:
            key = ((), rel, rhs)
        if key not in seen:
            seen.add(key)
            out.append((coeffs, rel, rhs))
    return out

"""A small exact-arithmetic SMT solver for quantifier-free boolean
combinations of linear constraints over rationals and integers.

The solver reads SMT-LIB2 commands from stdin and answers on stdout; it
is installed as the `wfsmt` console script and serves as the default
backend when no external solver is available. The architecture is
CDCL(T): assertions are translated to CNF over interned atoms via
Tseitin encoding, a conflict-driven watched-literal SAT search
enumerates propositional models, and assignments are checked against
the exact simplex core (strict inequalities through gap maximization,
integer sorts through branch and bound). Theory conflicts are
minimized through Farkas certificates and learned as clauses. Quantified assertions make check-sat answer
`unknown`; integer searches that exceed the branching budget do too.
All arithmetic is exact.
"""

from __future__ import annotations

import sys
from fractions import Fraction
from math import ceil, floor, gcd

from ..linprog import EQ, LE, LT, LinearSystem, lp_probe
from .sexpr import SexprError, num_text, parse_all, to_text

BNB_NODE_CAP = 4000

_BOOL_HEADS = {"not", "and", "or", "=>", "xor", "<", "<=", ">", ">=",
               "true", "false", "forall", "exists", "distinct"}


class SmtError(Exception):
    pass


class _Unsupported(Exception):
    """Raised on constructs outside the supported fragment."""


class _GaveUp(Exception):
    """Raised when the integer search exceeds its branching budget."""


# ---------------------------------------------------------------------------
# Term translation

class _Builder:
    """Interns atoms and lowers assertion terms to boolean formula trees.

    Atom indices are 0-based; propositional literals are the nonzero
    integers +-(index + 1). Linear atoms are canonicalized ((coeffs,
    rel, rhs) with rel one of <=, <, =) and, when every variable is
    integer-sorted with integral coefficients, tightened to non-strict
    integral bounds.
    """

    def __init__(self, sorts, macros):
        self.sorts = sorts
        self.macros = macros
        self.atoms = []          # ("bool", name) | ("lin", items, rel, rhs)
        self.index = {}
        self.eq_split = {}       # eq atom index -> (lt lit, gt lit)
        self.side_clauses = []   # clauses from equality splitting
        # SAT variables are drawn from one counter shared between atoms
        # and CNF auxiliaries, so the builder can keep lowering new
        # assertions incrementally without renumbering anything
        self.counter = 0
        self.varno = []          # atom index -> SAT variable
        self.atom_of = {}        # SAT variable -> atom index

    def new_var(self) -> int:
        self.counter += 1
        return self.counter

    def lit(self, atom):
        if atom not in self.index:
            idx = len(self.atoms)
            self.index[atom] = idx
            self.atoms.append(atom)
            var = self.new_var()
            self.varno.append(var)
            self.atom_of[var] = idx
            if atom[0] == "lin" and atom[2] == EQ:
                self._split_equality(idx)
        return self.varno[self.index[atom]]

    def _split_equality(self, idx):
        _, items, _, rhs = self.atoms[idx]
        coeffs = dict(items)
        lt = self.lit(self._lin_atom(coeffs, LT, rhs))
        gt = self.lit(self._lin_atom({v: -c for v, c in coeffs.items()}, LT, -rhs))
        a = self.varno[idx]
        # a false forces one strict side; either strict side refutes a
        self.eq_split[idx] = (lt, gt)
        self.side_clauses += [[a, lt, gt], [-a, -lt], [-a, -gt]]

    # -- booleans

    def formula(self, node, env):
        if isinstance(node, str):
            if node == "true":
                return ("const", True)
            if node == "false":
                return ("const", False)
            if node in env:
                return self.formula(*env[node])
            if node in self.macros:
                return self.formula(self.macros[node][1], {})
            if self.sorts.get(node) == "Bool":
                return ("lit", self.lit(("bool", node)))
            raise SmtError(f"unknown boolean term {node}")
        if not node:
            raise SmtError("empty term")
        head = node[0]
        args = node[1:]
        if head == "not":
            return ("not", self.formula(args[0], env))
        if head in ("and", "or"):
            return (head, [self.formula(a, env) for a in args])
        if head == "=>":
            parts = [("not", self.formula(a, env)) for a in args[:-1]]
            return ("or", parts + [self.formula(args[-1], env)])
        if head == "xor":
            out = self.formula(args[0], env)
            for a in args[1:]:
                f = self.formula(a, env)
                out = ("or", [("and", [out, ("not", f)]),
                              ("and", [("not", out), f])])
            return out
        if head == "ite":
            c = self.formula(args[0], env)
            return ("or", [("and", [c, self.formula(args[1], env)]),
                           ("and", [("not", c), self.formula(args[2], env)])])
        if head == "let":
            inner = dict(env)
            for name, value in node[1]:
                inner[name] = (value, env)
            return self.formula(node[2], inner)
        if head in ("forall", "exists"):
            raise _Unsupported("quantifier")
        if head == "=" and self._is_bool(args[0], env):
            parts = []
            for a, b in zip(args, args[1:]):
                fa, fb = self.formula(a, env), self.formula(b, env)
                parts.append(("or", [("and", [fa, fb]),
                                     ("and", [("not", fa), ("not", fb)])]))
            return ("and", parts)
        if head in ("<", "<=", ">", ">=", "="):
            parts = [self.relation(head, a, b, env)
                     for a, b in zip(args, args[1:])]
            return parts[0] if len(parts) == 1 else ("and", parts)
        if head == "distinct":
            parts = []
            for k, a in enumerate(args):
                for b in args[k + 1:]:
                    parts.append(("not", self.relation("=", a, b, env)))
            return parts[0] if len(parts) == 1 else ("and", parts)
        raise SmtError(f"unknown operator {to_text(head)}")

    def _is_bool(self, node, env):
        while isinstance(node, str) and node in env:
            node = env[node][0]
        if isinstance(node, str):
            if node in ("true", "false"):
                return True
            if node in self.macros:
                return self.macros[node][0] == "Bool"
            return self.sorts.get(node) == "Bool"
        return node and node[0] in _BOOL_HEADS or node[0] == "=" and \
            self._is_bool(node[1], env)

    # -- arithmetic

    def relation(self, op, lhs, rhs, env):
        cl, kl = self.linear(lhs, env)
        cr, kr = self.linear(rhs, env)
        coeffs = dict(cl)
        for v, c in cr.items():
            coeffs[v] = coeffs.get(v, Fraction(0)) - c
        coeffs = {v: c for v, c in coeffs.items() if c}
        bound = kr - kl
        if op in (">", ">="):
            coeffs = {v: -c for v, c in coeffs.items()}
            bound = -bound
            op = "<" if op == ">" else "<="
        rel = {"<": LT, "<=": LE, "=": EQ}[op]
        if not coeffs:
            holds = (bound > 0 if rel == LT else
                     bound >= 0 if rel == LE else bound == 0)
            return ("const", holds)
        atom = self._lin_atom(coeffs, rel, bound)
        if atom is None:
            return ("const", False)
        return ("lit", self.lit(atom))

    def _lin_atom(self, coeffs, rel, bound):
        """Canonical atom, or None when false over the declared sorts."""
        if all(self.sorts.get(v) == "Int" for v in coeffs):
            scale = 1
            for c in coeffs.values():
                scale = scale * c.denominator // gcd(scale, c.denominator)
            coeffs = {v: c * scale for v, c in coeffs.items()}
            bound = bound * scale
            g = 0
            for c in coeffs.values():
                g = gcd(g, abs(int(c)))
            coeffs = {v: c / g for v, c in coeffs.items()}
            bound = bound / g
            if rel == LT:
                rel = LE
                bound = Fraction(ceil(bound) - 1 if bound.denominator == 1
                                 else floor(bound))
            elif rel == LE and bound.denominator != 1:
                bound = Fraction(floor(bound))
            elif rel == EQ and bound.denominator != 1:
                return None
        first = min(coeffs)
        scale = abs(coeffs[first])
        items = tuple(sorted((v, c / scale) for v, c in coeffs.items()))
        return ("lin", items, rel, bound / scale)

    def linear(self, node, env):
        """Lower an arithmetic term to (coeffs, constant)."""
        if isinstance(node, str):
            if node in env:
                return self.linear(*env[node])
            if node in self.macros:
                return self.linear(self.macros[node][1], {})
            sort = self.sorts.get(node)
            if sort in ("Int", "Real"):
                return {node: Fraction(1)}, Fraction(0)
            try:
                return {}, Fraction(node)
            except ValueError:
                raise SmtError(f"unknown arithmetic term {node}") from None
        head = node[0]
        args = node[1:]
        if head == "let":
            inner = dict(env)
            for name, value in node[1]:
                inner[name] = (value, env)
            return self.linear(node[2], inner)
        if head == "-" and len(args) == 1:
            c, k = self.linear(args[0], env)
            return {v: -x for v, x in c.items()}, -k
        if head in ("+", "-"):
            coeffs, const = self.linear(args[0], env)
            coeffs = dict(coeffs)
            for a in args[1:]:
                c2, k2 = self.linear(a, env)
                sign = 1 if head == "+" else -1
                for v, x in c2.items():
                    coeffs[v] = coeffs.get(v, Fraction(0)) + sign * x
                const += sign * k2
            return coeffs, const
        if head == "*":
            coeffs, const = {}, Fraction(1)
            for a in args:
                c2, k2 = self.linear(a, env)
                if c2 and coeffs:
                    raise _Unsupported("nonlinear product")
                if c2:
                    coeffs, c2, k2, const = c2, {}, const, k2
                coeffs = {v: x * k2 for v, x in coeffs.items()}
                const *= k2
            return coeffs, const
        if head == "/":
            coeffs, const = self.linear(args[0], env)
            for a in args[1:]:
                c2, k2 = self.linear(a, env)
                if c2 or k2 == 0:
                    raise _Unsupported("nonconstant divisor")
                coeffs = {v: x / k2 for v, x in coeffs.items()}
                const /= k2
            return coeffs, const
        raise SmtError(f"unknown arithmetic operator {to_text(head)}")


# ---------------------------------------------------------------------------
# CNF

def _simplify(f):
    kind = f[0]
    if kind in ("lit", "const"):
        return f
    if kind == "not":
        sub = _simplify(f[1])
        if sub[0] == "const":
            return ("const", not sub[1])
        if sub[0] == "not":
            return sub[1]
        if sub[0] == "lit":
            return ("lit", -sub[1])
        return ("not", sub)
    parts, absorb = [], (kind == "or")
    for sub in (_simplify(x) for x in f[1]):
        if sub[0] == "const":
            if sub[1] == absorb:
                return ("const", absorb)
            continue
        if sub[0] == kind:
            parts.extend(sub[1])
        else:
            parts.append(sub)
    if not parts:
        return ("const", not absorb)
    if len(parts) == 1:
        return parts[0]
    return (kind, parts)


def _tseitin(formulas, builder):
    """CNF-encode a conjunction of formula trees, drawing auxiliary
    variables from the builder's shared counter.

    Returns the clause list, or None when propositionally false.
    """
    clauses = []

    def lit_of(f):
        kind = f[0]
        if kind == "lit":
            return f[1]
        if kind == "not":
            return -lit_of(f[1])
        subs = [lit_of(x) for x in f[1]]
        v = builder.new_var()
        if kind == "and":
            for s in subs:
                clauses.append([-v, s])
            clauses.append([v] + [-s for s in subs])
        else:
            for s in subs:
                clauses.append([v, -s])
            clauses.append([-v] + subs)
        return v

    for f in formulas:
        f = _simplify(f)
        if f[0] == "const":
            if not f[1]:
                return None
            continue
        if f[0] == "and":
            for sub in f[1]:
                clauses.append([lit_of(sub)])
        else:
            clauses.append([lit_of(f)])
    return clauses


# ---------------------------------------------------------------------------
# SAT search

class _Sat:
    """Conflict-driven clause learning over watched literals.

    Conflicts (propositional or theory-reported) are analyzed to the
    first unique implication point; the learned clause drives a
    non-chronological backjump. Decision phases are saved across
    backjumps and restarts, so restarts keep the learned clauses but
    escape unproductive regions.
    """

    def __init__(self):
        self.n = 0
        self.clauses = []
        self.watches = {}
        self.value = [None]
        self.level = [0]
        self.reason = [None]     # clause index, None = decision
        self.phase = [False]
        self.trail = []          # assigned literals in order
        self.lim = []            # trail length at each decision
        self.queue = []          # (literal, reason clause index)
        self.units = []          # unit clauses, re-asserted on restart
        self.ok = True
        # decision order: theory atoms first, so that defined booleans
        # and Tseitin variables follow by unit propagation; reassigned
        # by the owner before each search
        self.order = []

    def ensure_vars(self, n_vars) -> None:
        if n_vars > self.n:
            grow = n_vars - self.n
            self.value += [None] * grow
            self.level += [0] * grow
            self.reason += [None] * grow
            self.phase += [False] * grow
            self.n = n_vars

    def add_clause(self, c) -> None:
        lits = sorted(set(c), key=abs)
        seen = set(lits)
        if any(-l in seen for l in lits):
            return
        if not lits:
            self.ok = False
        elif len(lits) == 1:
            self.units.append(lits[0])
        else:
            self._attach(lits)

    def restart(self) -> None:
        """Forget all assignments (phases survive) and queue the unit
        clauses; learned clauses stay attached."""
        while self.trail:
            lit = self.trail.pop()
            var = abs(lit)
            self.phase[var] = self.value[var]
            self.value[var] = None
            self.reason[var] = None
        self.lim = []
        self.queue = [(u, None) for u in self.units]

    def _attach(self, lits) -> int:
        self.clauses.append(lits)
        idx = len(self.clauses) - 1
        for l in lits[:2]:
            self.watches.setdefault(l, []).append(idx)
        return idx

    def _lit_value(self, lit):
        v = self.value[abs(lit)]
        if v is None:
            return None
        return v if lit > 0 else not v

    def propagate(self):
        """Run BCP over the queued assignments; returns the literals of
        a falsified clause on conflict, else None."""
        value, clauses, queue = self.value, self.clauses, self.queue
        watches, trail = self.watches, self.trail
        while queue:
            lit, why = queue.pop()
            var = lit if lit > 0 else -lit
            v = value[var]
            if v is not None:
                if v != (lit > 0):
                    queue.clear()
                    reason = [] if why is None else clauses[why]
                    return [l for l in reason if l != lit] + [lit]
                continue
            value[var] = lit > 0
            self.level[var] = len(self.lim)
            self.reason[var] = why
            trail.append(lit)
            falsified = -lit
            watching = watches.get(falsified, [])
            kept = []
            conflict = None
            for pos, idx in enumerate(watching):
                lits = clauses[idx]
                w = 1 if lits[1] == falsified else 0
                other = lits[1 - w]
                ov = value[other] if other > 0 else \
                    (None if value[-other] is None else not value[-other])
                if ov is True:
                    kept.append(idx)
                    continue
                moved = False
                for k in range(2, len(lits)):
                    lk = lits[k]
                    kv = value[lk] if lk > 0 else \
                        (None if value[-lk] is None else not value[-lk])
                    if kv is not False:
                        lits[w], lits[k] = lk, lits[w]
                        watches.setdefault(lk, []).append(idx)
                        moved = True
                        break
                if moved:
                    continue
                kept.append(idx)
                if ov is False:
                    kept.extend(watching[pos + 1:])
                    conflict = list(lits)
                    break
                queue.append((other, idx))
            watches[falsified] = kept
            if conflict is not None:
                queue.clear()
                return conflict
        return None

    def _backjump(self, target_level):
        keep = self.lim[target_level] if target_level < len(self.lim) \
            else len(self.trail)
        while len(self.trail) > keep:
            lit = self.trail.pop()
            var = abs(lit)
            self.phase[var] = self.value[var]
            self.value[var] = None
            self.reason[var] = None
        del self.lim[target_level:]
        self.queue.clear()

    def _resolve(self, conflict) -> bool:
        """Learn a first-UIP clause from a falsified clause and
        backjump; False when the conflict is at the root level."""
        lits = [l for l in conflict if self._lit_value(l) is not None]
        if not lits:
            return False
        top = max(self.level[abs(l)] for l in lits)
        if top == 0:
            return False
        if top < len(self.lim):
            self._backjump(top)
        seen = set()
        learned = []
        counter = 0
        for q in lits:
            var = abs(q)
            if var in seen or self.level[var] == 0:
                continue
            seen.add(var)
            if self.level[var] == top:
                counter += 1
            else:
                learned.append(q)
        idx = len(self.trail) - 1
        uip = None
        while counter:
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            lit = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                uip = -lit
                break
            for q in self.clauses[self.reason[abs(lit)]]:
                var = abs(q)
                if q == lit or var in seen or self.level[var] == 0:
                    continue
                seen.add(var)
                if self.level[var] == top:
                    counter += 1
                else:
                    learned.append(q)
        back = max((self.level[abs(l)] for l in learned), default=0)
        self._backjump(back)
        clause = [uip] + sorted(learned, key=lambda l: -self.level[abs(l)])
        if len(clause) > 1:
            why = self._attach(clause)
        else:
            why = None
            self.units.append(uip)
        self.queue.append((uip, why))
        return True

    def search(self, theory_check, hint=None, relevant=None):
        """Enumerate assignments until theory_check accepts one.

        theory_check(value, root_vars, full) is consulted at every
        propagation quiescence; it returns None on consistency or a
        conflict clause over currently asserted literals. Theory
        conflict clauses join the clause database and are analyzed like
        propositional conflicts. Decision polarity follows the saved
        phase, seeded by hint(var): deciding theory atoms toward the
        current theory witness keeps the assignment consistent until
        propagation forces a genuine deviation. Returns True iff
        satisfiable.
        """
        if not self.ok:
            return False
        self.restart()
        conflicts = 0
        limit = 100.0
        hinted = [False] * (self.n + 1)
        ptr = 0                    # static-order scan resumes here
        checked = 0                # trail length at the last theory call
        root_vars, root_len = frozenset(), -1
        while True:
            conflict = self.propagate()
            if conflict is not None:
                conflicts += 1
                if not self._resolve(conflict):
                    self.ok = False
                    return False
                if conflicts >= limit:
                    conflicts = 0
                    limit *= 1.5
                    self._backjump(0)
                    self.queue.extend((u, None) for u in self.units)
                ptr = 0
                checked = min(checked, len(self.trail))
                continue
            root = self.lim[0] if self.lim else len(self.trail)
            if root != root_len:
                root_vars = frozenset(abs(l) for l in self.trail[:root])
                root_len = root
            while ptr < len(self.order) and \
                    self.value[self.order[ptr]] is not None:
                ptr += 1
            free = self.order[ptr] if ptr < len(self.order) else None
            # a partial theory probe is pure pruning, so it is skipped
            # unless a theory-relevant atom moved since the last probe
            if free is None or relevant is None or \
                    any((l if l > 0 else -l) in relevant
                        for l in self.trail[checked:]):
                clause = theory_check(self.value, root_vars, free is None)
                checked = len(self.trail)
            else:
                clause = None
            if clause is not None:
                conflicts += 1
                if len(clause) > 1:
                    self._attach(list(clause))
                if not self._resolve(clause):
                    self.ok = False
                    return False
                ptr = 0
                checked = min(checked, len(self.trail))
                continue
            if free is None:
                return True
            if not hinted[free] and hint is not None:
                self.phase[free] = hint(free)
                hinted[free] = True
            self.lim.append(len(self.trail))
            self.queue.append((free if self.phase[free] else -free, None))


# ---------------------------------------------------------------------------
# Theory

def _gauss_presolve(rows):
    """Eliminate equality rows by substitution before the simplex call.

    Rows are (coeffs, rel, rhs, tags) with tags the set of literals the
    row descends from; substitution merges tag sets, so any refutation
    over the remaining rows maps back to literals. Returns (remaining
    rows, substitutions, conflict tags); substitutions are (var, expr,
    const) with var = const + expr evaluated in reverse order for
    witness reconstruction, and conflict tags are None unless a row
    degenerated to an inconsistent constant.
    """
    subs = []
    while True:
        idx = next((k for k, (c, rel, _, _) in enumerate(rows)
                    if rel == EQ and c), None)
        if idx is None:
            break
        coeffs, _, rhs, tags = rows.pop(idx)
        v = min(coeffs)
        cv = coeffs[v]
        expr = {k: -x / cv for k, x in coeffs.items() if k != v}
        const = rhs / cv
        subs.append((v, expr, const))
        for pos, (c, rel, r, t) in enumerate(rows):
            if v not in c:
                continue
            cv2 = c.pop(v)
            for k, x in expr.items():
                c[k] = c.get(k, Fraction(0)) + cv2 * x
            rows[pos] = ({k: x for k, x in c.items() if x}, rel,
                         r - cv2 * const, t | tags)
    out = []
    for c, rel, r, t in rows:
        if not c:
            if (rel == EQ and r != 0) or (rel == LE and r < 0) or \
                    (rel == LT and r <= 0):
                return rows, subs, t
            continue
        out.append((c, rel, r, t))
    return out, subs, None


class _Theory:
    def __init__(self, builder, sorts):
        self.atoms = builder.atoms
        self.varno = builder.varno
        self.atom_of = builder.atom_of
        self.sorts = sorts
        self.variables = sorted(
            {v for a in self.atoms if a[0] == "lin" for v, _ in a[1]})
        self.int_vars = [v for v in self.variables
                         if sorts.get(v) == "Int"]
        self.cache = {}
        self.feasible_sets = []  # recent feasible literal sets
        self._last_partial = None
        self._witness = None     # most recent feasible witness
        self._wit_memo = {}      # literal -> holds under _witness
        self.conflicts = []      # conflict clauses learned this search
        self.model = None

    def asserted_literals(self, value):
        lits = []
        for idx, atom in enumerate(self.atoms):
            if atom[0] != "lin":
                continue
            var = self.varno[idx]
            val = value[var]
            if val is None:
                continue
            if atom[2] == EQ and not val:
                continue  # the split companions carry the disequality
            lits.append(var if val else -var)
        return tuple(lits)

    def _constraints(self, lits):
        plain, strict = [], []
        for lit in lits:
            _, items, rel, rhs = self.atoms[self.atom_of[abs(lit)]]
            coeffs = dict(items)
            if lit < 0:
                coeffs = {v: -c for v, c in coeffs.items()}
                rel = LT if rel == LE else LE
                rhs = -rhs
            (strict if rel == LT else plain).append((coeffs, rel, rhs))
        return plain, strict

    def _rows(self, lits):
        rows = []
        for lit in lits:
            _, items, rel, rhs = self.atoms[self.atom_of[abs(lit)]]
            coeffs = dict(items)
            if lit < 0:
                coeffs = {v: -c for v, c in coeffs.items()}
                rel = LT if rel == LE else LE
                rhs = -rhs
            rows.append((coeffs, rel, Fraction(rhs), frozenset((lit,))))
        return rows

    def feasible(self, lits):
        """Exact rational feasibility of a literal set, with a witness."""
        witness, _ = self._probe(self._rows(lits))
        return witness

    def _solve(self, plain, strict, extra):
        rows = [(c, rel, r, frozenset())
                for c, rel, r in plain + strict + extra]
        witness, _ = self._probe(rows)
        return witness

    @staticmethod
    def _tighten(rows):
        """Keep only the tightest row per coefficient vector: the least
        bound per relation, and a strict bound subsumes a non-strict one
        at or above it. Equal equalities with different right-hand sides
        refute immediately."""
        best = {}
        for coeffs, rel, rhs, tags in rows:
            key = (tuple(sorted(coeffs.items())), rel)
            seen = best.get(key)
            if seen is not None and rel == EQ and rhs != seen[0]:
                return None, (coeffs, seen[1] | tags)
            if seen is None or rhs < seen[0]:
                best[key] = (rhs, tags)
        out = []
        for (items, rel), (rhs, tags) in best.items():
            if rel == LE:
                strict = best.get((items, LT))
                if strict is not None and strict[0] <= rhs:
                    continue
            out.append((dict(items), rel, rhs, tags))
        return out, None

    def _probe(self, rows):
        """(witness, None) when the tagged rows are simultaneously
        satisfiable, else (None, refuting tag union)."""
        rows = [(c, rel, Fraction(r), frozenset(t))
                for c, rel, r, t in rows]
        rows, clash = self._tighten(rows)
        if rows is None:
            return None, set(clash[1])
        work = []
        has_strict = False
        for coeffs, rel, rhs, tags in rows:
            coeffs = dict(coeffs)
            if rel == LT:
                has_strict = True
                coeffs["__gap"] = Fraction(1)
                rel = LE
            work.append((coeffs, rel, Fraction(rhs), set(tags)))
        if has_strict:
            work.append(({"__gap": Fraction(1)}, LE, Fraction(1), set()))
        work, subs, bad = _gauss_presolve(work)
        if bad is not None:
            return None, bad
        names = sorted({v for c, _, _, _ in work for v in c})
        sys = LinearSystem(names, nonneg={"__gap"} & set(names))
        for coeffs, rel, rhs, _ in work:
            sys.add(coeffs, rel, rhs)
        if has_strict and "__gap" in set(names):
            # the gap <= 1 row keeps the objective bounded
            res, refuted = lp_probe(sys, {"__gap": 1})
            ok = res.feasible and res.optimum > 0
        else:
            res, refuted = lp_probe(sys)
            ok = res.feasible
        if not ok:
            core = set()
            for k in refuted or ():
                core |= work[k][3]
            return None, core
        point = dict(res.assignment)
        for v, expr, const in reversed(subs):
            point[v] = const + sum(
                x * point.get(k, Fraction(0)) for k, x in expr.items())
        point.pop("__gap", None)
        return {v: point.get(v, Fraction(0)) for v in self.variables}, None

    def check(self, value, root_vars=frozenset(), full=True):
        """None when the assignment is theory-consistent (a model is
        stored on full assignments), else a conflict clause.

        Partial assignments get a rational feasibility check only; a
        set contained in a recently seen feasible set is feasible
        without a simplex call. Integer branch and bound runs only on
        full assignments.
        """
        lits = self.asserted_literals(value)
        witness = None
        if not full and lits == self._last_partial:
            return None
        if self._witness is not None and \
                all(map(self._holds_memo, lits)):
            witness = self._witness
        elif not full:
            litset = frozenset(lits)
            if any(litset <= seen for seen in self.feasible_sets):
                self._last_partial = lits
                return None
        core = None
        if witness is None:
            if lits in self.cache:
                witness, core = self.cache[lits]
            else:
                witness, core = self._probe(self._rows(lits))
                self.cache[lits] = (witness, core)
        if witness is None:
            clause = [-l for l in core if abs(l) not in root_vars]
            self.conflicts.append(clause)
            return clause
        if witness is not self._witness:
            self._witness = witness
            self._wit_memo = {}
        self.feasible_sets.insert(0, frozenset(lits))
        del self.feasible_sets[40:]
        if not full:
            self._last_partial = lits
            return None
        if self.int_vars:
            witness = self._integerize(lits, witness)
            if witness is None:
                clause = [-l for l in
                          self._minimize(lits, root_vars, integral=True)]
                self.conflicts.append(clause)
                return clause
        self.model = witness
        return None

    def hint(self, var):
        """Preferred decision polarity: follow the current witness on
        theory atoms, default to False elsewhere."""
        idx = self.atom_of.get(var)
        if self._witness is None or idx is None or \
                self.atoms[idx][0] != "lin":
            return False
        return self._holds_memo(var)

    def _holds_memo(self, lit):
        """Whether the current witness satisfies the literal."""
        val = self._wit_memo.get(lit)
        if val is None:
            _, items, rel, rhs = self.atoms[self.atom_of[abs(lit)]]
            w = self._witness
            lhs = sum(c * w[v] for v, c in items)
            val = (lhs <= rhs if rel == LE else
                   lhs < rhs if rel == LT else lhs == rhs)
            if lit < 0:
                val = not val
            self._wit_memo[lit] = val
        return val

    def _minimize(self, lits, root_vars, integral=False):
        """Greedy deletion toward a small integrally infeasible core.

        Literals forced at the root level are globally true, so they
        stay in every feasibility probe but are dropped from the
        returned core (and hence from the learned clause).
        """
        def infeasible(subset):
            point = self.feasible(tuple(fixed + subset))
            if point is None:
                return True
            return integral and \
                self._integerize(tuple(fixed + subset), point) is None

        fixed = [l for l in lits if abs(l) in root_vars]
        core = [l for l in lits if abs(l) not in root_vars]
        for lit in list(core):
            trial = [l for l in core if l != lit]
            if infeasible(trial):
                core = trial
        return core

    def _integerize(self, lits, witness):
        """Branch and bound toward an integral point for the Int sorts."""
        fractional = [v for v in self.int_vars
                      if witness.get(v, Fraction(0)).denominator != 1]
        if not fractional:
            return witness
        plain, strict = self._constraints(lits)
        if self._gcd_refutes(plain):
            return None
        nodes = 0
        stack = [[]]
        while stack:
            nodes += 1
            if nodes > BNB_NODE_CAP:
                raise _GaveUp
            extra = stack.pop()
            point = self._solve(plain, strict, extra)
            if point is None:
                continue
            branch = next((v for v in self.int_vars
                           if point.get(v, Fraction(0)).denominator != 1), None)
            if branch is None:
                return point
            val = point[branch]
            stack.append(extra + [({branch: Fraction(1)}, LE,
                                   Fraction(floor(val)))])
            stack.append(extra + [({branch: Fraction(-1)}, LE,
                                   Fraction(-ceil(val)))])
        return None

    def _gcd_refutes(self, plain):
        """A pure-integer equality whose coefficient gcd misses the
        right-hand side has no integral solution."""
        for coeffs, rel, rhs in plain:
            if rel != EQ:
                continue
            if any(self.sorts.get(v) != "Int" for v in coeffs):
                continue
            scale = 1
            for c in coeffs.values():
                scale = scale * c.denominator // gcd(scale, c.denominator)
            g = 0
            for c in coeffs.values():
                g = gcd(g, abs(int(c * scale)))
            if g and (rhs * scale).denominator == 1 and \
                    int(rhs * scale) % g != 0:
                return True
        return False


# ---------------------------------------------------------------------------
# Solver state and command interpreter

class Solver:
    def __init__(self):
        self.reset()

    def reset(self):
        self.sorts = {}
        self.macros = {}
        self.assertions = []
        self.frames = []
        self.status = None
        self.model = None
        # theory conflict clauses carried across check-sat calls, keyed
        # by the atoms themselves; each is valid whenever the assertion
        # prefix it was learned under is still present
        self.lemmas = []         # (assertion count, ((sign, atom), ...))
        self.lemma_keys = set()
        self.warm = None         # last theory witness, re-seeded next call
        # persistent lowering state: assertion formula trees are cached
        # while the assertion list only grows, so repeated check-sat
        # calls lower just the delta
        self._builder = None
        self._trees = []

    # -- commands

    def execute(self, cmd) -> str | None:
        if not isinstance(cmd, list) or not cmd:
            raise SmtError("malformed command")
        head = cmd[0]
        if head in ("set-logic", "set-option", "set-info"):
            return None
        if head == "declare-const":
            return self._declare(cmd[1], cmd[2])
        if head == "declare-fun":
            if cmd[2]:
                raise SmtError("uninterpreted functions are unsupported")
            return self._declare(cmd[1], cmd[3])
        if head == "define-fun":
            if cmd[2]:
                raise SmtError("function definitions must be 0-ary")
            self.macros[cmd[1]] = (cmd[3], cmd[4])
            self._frame_note("macros", cmd[1])
            self._builder = None
            self._trees = []
            return None
        if head == "assert":
            self.assertions.append(cmd[1])
            return None
        if head == "push":
            for _ in range(int(cmd[1]) if len(cmd) > 1 else 1):
                self.frames.append({"n": len(self.assertions),
                                    "decls": [], "macros": []})
            return None
        if head == "pop":
            for _ in range(int(cmd[1]) if len(cmd) > 1 else 1):
                if not self.frames:
                    raise SmtError("pop without matching push")
                frame = self.frames.pop()
                del self.assertions[frame["n"]:]
                for name in frame["decls"]:
                    del self.sorts[name]
                for name in frame["macros"]:
                    del self.macros[name]
            kept = [(n, c) for n, c in self.lemmas
                    if n <= len(self.assertions)]
            if len(kept) != len(self.lemmas):
                self.lemmas = kept
                self.lemma_keys = {c for _, c in kept}
            self.status = None
            self._builder = None
            self._trees = []
            return None
        if head == "check-sat":
            return self.check_sat()
        if head == "get-value":
            return self.get_value(cmd[1])
        if head == "get-model":
            return self.get_model()
        if head == "echo":
            return cmd[1].strip('"')
        if head == "reset":
            self.reset()
            return None
        if head == "exit":
            raise SystemExit(0)
        raise SmtError(f"unknown command {to_text(head)}")

    def _declare(self, name, sort):
        if sort not in ("Bool", "Int", "Real"):
            raise SmtError(f"unsupported sort {to_text(sort)}")
        self.sorts[name] = sort
        self._frame_note("decls", name)
        return None

    def _frame_note(self, kind, name):
        if self.frames:
            self.frames[-1][kind].append(name)

    # -- solving

    def check_sat(self) -> str:
        if self._builder is None:
            self._builder = _Builder(self.sorts, self.macros)
            self._trees = []
            self._sat = _Sat()
            self._cnf_done = 0
            self._side_done = 0
            # lemmas learned before this state was (re)built need a
            # replay; everything learned while it lives is already in
            # the clause database
            self._replay = list(self.lemmas)
        builder = self._builder
        sat = self._sat
        try:
            while len(self._trees) < len(self.assertions):
                self._trees.append(
                    builder.formula(self.assertions[len(self._trees)], {}))
        except _Unsupported:
            self.status = "unknown"
            return "unknown"
        clauses = _tseitin(self._trees[self._cnf_done:], builder)
        self._cnf_done = len(self._trees)
        sat.ensure_vars(builder.counter)
        if clauses is None:
            sat.ok = False
        else:
            for c in clauses:
                sat.add_clause(c)
        for c in builder.side_clauses[self._side_done:]:
            sat.add_clause(c)
        self._side_done = len(builder.side_clauses)
        for _, stored in self._replay:
            lits = []
            for sign, atom in stored:
                idx = builder.index.get(atom)
                if idx is None:
                    break
                lits.append(sign * builder.varno[idx])
            else:
                sat.add_clause(lits)
        self._replay = []
        theory = _Theory(builder, self.sorts)
        if self.warm is not None:
            theory._witness = {v: self.warm.get(v, Fraction(0))
                               for v in theory.variables}
        lin = [builder.varno[i] for i, a in enumerate(builder.atoms)
               if a[0] == "lin"]
        linset = frozenset(lin)
        sat.order = lin + [v for v in range(1, builder.counter + 1)
                           if v not in linset]
        try:
            found = sat.search(theory.check, hint=theory.hint,
                               relevant=linset)
        except _GaveUp:
            self._harvest(builder, theory)
            self.status = "unknown"
            return "unknown"
        self._harvest(builder, theory)
        if theory._witness is not None:
            self.warm = theory._witness
        if not found:
            self.status = "unsat"
            return "unsat"
        self.status = "sat"
        self.model = self._extract_model(builder, theory, sat.value)
        return "sat"

    def _harvest(self, builder, theory):
        """Keep this search's theory conflicts for later check-sat
        calls; they only mention theory atoms, whose identity survives
        reformulation."""
        count = len(self.assertions)
        for clause in theory.conflicts:
            stored = tuple(sorted(
                ((1 if l > 0 else -1), builder.atoms[builder.atom_of[abs(l)]])
                for l in clause))
            if stored not in self.lemma_keys:
                self.lemma_keys.add(stored)
                self.lemmas.append((count, stored))

    def _extract_model(self, builder, theory, value):
        model = {}
        for idx, atom in enumerate(builder.atoms):
            if atom[0] == "bool":
                model[atom[1]] = bool(value[builder.varno[idx]])
        witness = theory.model or {}
        for name, sort in self.sorts.items():
            if sort == "Bool":
                model.setdefault(name, False)
            else:
                model.setdefault(name, witness.get(name, Fraction(0)))
        return model

    # -- model output

    def get_value(self, terms) -> str:
        if self.status != "sat" or self.model is None:
            raise SmtError("no model available")
        parts = []
        for term in terms:
            parts.append(f"({to_text(term)} {self._eval(term)})")
        return "(" + " ".join(parts) + ")"

    def get_model(self) -> str:
        if self.status != "sat" or self.model is None:
            raise SmtError("no model available")
        lines = []
        for name in sorted(self.model):
            sort = self.sorts.get(name, "Bool")
            lines.append(f"  (define-fun {name} () {sort} "
                         f"{self._render(self.model[name], sort)})")
        return "(\n" + "\n".join(lines) + "\n)"

    def _eval(self, term) -> str:
        if isinstance(term, str) and term in self.sorts:
            return self._render(self.model[term], self.sorts[term])
        builder = _Builder(self.sorts, self.macros)
        try:
            coeffs, const = builder.linear(term, {})
            value = const + sum(c * Fraction(self.model[v])
                                for v, c in coeffs.items())
            return self._render(value, "Real")
        except (SmtError, _Unsupported, KeyError):
            pass
        value = self._eval_bool(term)
        return "true" if value else "false"

    def _eval_bool(self, term):
        builder = _Builder(self.sorts, self.macros)
        f = _simplify(builder.formula(term, {}))
        return self._eval_formula(f, builder)

    def _eval_formula(self, f, builder):
        kind = f[0]
        if kind == "const":
            return f[1]
        if kind == "not":
            return not self._eval_formula(f[1], builder)
        if kind in ("and", "or"):
            vals = [self._eval_formula(x, builder) for x in f[1]]
            return all(vals) if kind == "and" else any(vals)
        atom = builder.atoms[builder.atom_of[abs(f[1])]]
        if atom[0] == "bool":
            val = bool(self.model.get(atom[1], False))
        else:
            _, items, rel, rhs = atom
            lhs = sum(c * Fraction(self.model.get(v, 0)) for v, c in items)
            val = (lhs <= rhs if rel == LE else
                   lhs < rhs if rel == LT else lhs == rhs)
        return val if f[1] > 0 else not val

    @staticmethod
    def _render(value, sort):
        if isinstance(value, bool):
            return "true" if value else "false"
        value = Fraction(value)
        if sort == "Int":
            if value < 0:
                return f"(- {-value})"
            return str(value)
        return num_text(value)


def _balanced(text: str) -> bool:
    depth, i, n = 0, 0, len(text)
    while i < n:
        c = text[i]
        if c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                return False
            i = j
        elif c == '"':
            j = text.find('"', i + 1)
            if j < 0:
                return False
            i = j
        elif c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        i += 1
    return depth <= 0


def main(argv=None) -> int:
    solver = Solver()
    buffer = ""
    for line in sys.stdin:
        buffer += line
        if not _balanced(buffer):
            continue
        try:
            commands = parse_all(buffer)
        except SexprError:
            continue
        buffer = ""
        for cmd in commands:
            try:
                out = solver.execute(cmd)
            except SystemExit:
                return 0
            except (SmtError, SexprError, ValueError, IndexError) as exc:
                out = f'(error "{exc}")'
            if out is not None:
                print(out, flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())

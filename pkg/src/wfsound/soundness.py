"""Soundness decisions through the SMT bridge.

Continuous reachability is answered by the satisfiability of the level
encoding (`emit_psi`); the answers must, and in the test suite do,
agree with the direct fixpoint decision in `reach`. Continuous
soundness is decided by a counterexample-guided loop over
quantifier-free queries: the solver proposes continuously reachable
markings, validated candidates that do reach the final marking are
blocked wholesale by a region of markings that provably also reach it,
and exhaustion of candidates proves soundness. The one-alternation
quantified query is still emitted for audit. The least structurally
relevant token counts k (state-equation and integral-continuous
variants) are minimized by incremental linear search, because
quasi-soundness is not monotone in k.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from pathlib import Path

from . import nets
from .linprog import EQ, LE, LT, LinearSystem, lp_supremum
from .nets import Net, NetError
from .reach import decide_creach, explore_discrete, max_fireable_set
from .smt.driver import SolverError, SolverSession, solve_script
from .smt.script import (
    SmtScript, emit_psi, emit_soundness_query, emit_state_equation, symtab,
)
from .smt.sexpr import num_text

CEGAR_MAX_ROUNDS = 4096


def _dump(script: SmtScript, dump_dir, name: str) -> None:
    if dump_dir is None:
        return
    path = Path(dump_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / f"{name}.smt2").write_text(script.text())


# ---------------------------------------------------------------------------
# Quantifier-free reachability

def decide_creach_smt(net: Net, m, m2, solver=None, timeout=None,
                      dump_dir=None) -> bool:
    """Continuous reachability via the satisfiability of the level
    encoding; sat models are re-validated by substitution."""
    m = nets.marking(m)
    m2 = nets.marking(m2)
    script = emit_psi(net, m, m2, prefix="r")
    _dump(script, dump_dir, f"creach-{script.logic.lower()}")
    xs = script.meta["r:x"]
    res = solve_script(script, timeout=timeout, solver=solver,
                       values=list(xs.values()))
    if res.status == "unknown":
        raise SolverError(f"solver returned unknown ({res.detail})")
    if res.status == "unsat":
        return False
    parikh = {t: Fraction(res.model.get(name, 0)) for t, name in xs.items()}
    if not _validate_parikh(net, m, m2, parikh):
        raise SolverError("solver model failed substitution validation")
    return True


def _validate_parikh(net: Net, m, m2, parikh) -> bool:
    if any(v < 0 for v in parikh.values()):
        return False
    out = dict(m)
    for t, v in parikh.items():
        for p, d in net.effect(t).items():
            out[p] = out.get(p, Fraction(0)) + v * d
    if nets.canon(out) != nets.canon(m2):
        return False
    used = {t for t, v in parikh.items() if v > 0}
    fwd, _ = max_fireable_set(net, nets.support(m), used)
    if fwd != used:
        return False
    back, _ = max_fireable_set(nets.reverse_net(net), nets.support(m2), used)
    return back == used


def coverable_places_smt(net: Net, solver=None, timeout=None) -> set:
    """Coverability from one entry token, answered place by place as a
    reachability query with a symbolic target; agreement with the
    forward-saturation computation is a test invariant."""
    psym = symtab(net.places, prefix="m-")
    covered = set()
    for target in net.places:
        script = SmtScript()
        for p in net.places:
            script.declare(psym[p], "Real")
            script.assert_(f"(>= {psym[p]} 0)")
        script.extend(emit_psi(net, {net.initial_place: 1},
                               {p: psym[p] for p in net.places}, prefix="a"))
        script.assert_(f"(> {psym[target]} 0)")
        res = solve_script(script, timeout=timeout, solver=solver)
        if res.status == "unknown":
            raise SolverError(f"solver returned unknown ({res.detail})")
        if res.status == "sat":
            covered.add(target)
    return covered


# ---------------------------------------------------------------------------
# Continuous soundness

@dataclass
class ContinuousSoundness:
    sound: bool
    witness: dict | None = None    # marking reachable from i, not reaching f
    rounds: int = 0


def check_continuous_soundness(net: Net, solver=None, timeout=None,
                               dump_dir=None) -> ContinuousSoundness:
    """Decide whether every marking continuously reachable from one
    entry token continuously reaches one exit token.

    A bounded discrete exploration first looks for a reachable stuck
    marking, which refutes soundness outright. The complete decision is
    counterexample-guided: each candidate marking proposed by the
    solver is validated against the fixpoint decision procedure; good
    candidates are blocked by the region of markings sharing a
    realizable witness-run support, preferring the greatest realizable
    support for the candidate's place support, so the loop terminates
    after at most one round per transition support. A deadline overrun
    raises
    TimeoutError for the caller to report as inconclusive.
    """
    deadline = None if timeout is None else time.monotonic() + timeout
    audit = emit_soundness_query(net)
    _dump(audit, dump_dir, "cont-soundness-audit")

    # discretely reachable markings are continuously reachable, so a
    # stuck one among them refutes soundness without any solver round
    final = {net.final_place: Fraction(1)}
    for m in explore_discrete(net, {net.initial_place: 1}):
        reaches, _ = decide_creach(net, m, final)
        if not reaches:
            witness = {p: v for p, v in m.items() if v}
            return ContinuousSoundness(False, witness=witness)

    psym = symtab(net.places, prefix="m-")
    outer = SmtScript()
    for p in net.places:
        outer.declare(psym[p], "Real")
        outer.assert_(f"(>= {psym[p]} 0)")
    mvars = {p: psym[p] for p in net.places}
    outer.extend(emit_psi(net, {net.initial_place: 1}, mvars, prefix="a"))

    # seed markings are not blocked upfront: boolean blocks for their
    # supports slow every satisfiable round far more than they save
    blocked = set()

    with SolverSession(solver=solver) as session:
        session.send(outer.text())
        sent_decls = len(outer.declarations)
        sent_asserts = len(outer.assertions)
        for rounds in range(1, CEGAR_MAX_ROUNDS + 1):
            remaining = None if deadline is None \
                else deadline - time.monotonic()
            if remaining is not None and remaining <= 0:
                raise TimeoutError("continuous-soundness deadline exceeded")
            if rounds <= 3:
                _dump(outer, dump_dir, f"cont-soundness-round{rounds}")
            session.timeout = remaining
            status = session.check_sat()
            if status == "unknown":
                raise SolverError("solver returned unknown")
            if status == "unsat":
                return ContinuousSoundness(True, rounds=rounds)
            model = session.get_values(psym.values())
            candidate = {p: Fraction(model.get(psym[p], 0))
                         for p in net.places}
            candidate = {p: v for p, v in candidate.items() if v}
            ok, _ = decide_creach(net, {net.initial_place: 1}, candidate)
            if not ok:
                raise SolverError(
                    "candidate marking fails forward reachability validation")
            reaches, cert = decide_creach(net, candidate, final)
            if not reaches:
                return ContinuousSoundness(False, witness=candidate,
                                           rounds=rounds)
            support = frozenset(t for t, v in (cert.parikh or {}).items()
                                if v)
            chosen = _block_candidate(outer, net, mvars, candidate, support,
                                      blocked)
            if chosen is None:
                raise SolverError(
                    "no progress in candidate blocking (encoding bug)")
            delta = outer.declarations[sent_decls:] + \
                outer.assertions[sent_asserts:]
            sent_decls = len(outer.declarations)
            sent_asserts = len(outer.assertions)
            session.send("\n".join(delta) + "\n")
    raise SolverError("candidate blocking did not converge")


def _block_candidate(script: SmtScript, net: Net, mvars, m0, cert_support,
                     blocked: set) -> bool:
    """Block a region of markings that all reach the final marking and
    that contains the validated candidate m0.

    Blocks key on a transition support S that is backward-justifiable
    from the exit place: every marking that forward-justifies S and
    whose state equation to one exit token is solvable with amounts
    positive exactly on S reaches the final marking. The preferred S is
    the joint fixpoint for the candidate's place support - the greatest
    realizable support, shared by every candidate with a comparable
    support - and the candidate's own certificate support is the
    fallback when its state equation has no solution positive on all of
    the fixpoint. Returns the chosen support, or None when it was
    already blocked.
    """
    support = _cell_support(net, m0, cert_support)
    if support in blocked:
        return None
    blocked.add(support)
    _block_support(script, net, mvars, support, len(script.assertions))
    return support


def _cell_support(net: Net, m0, cert_support) -> frozenset:
    joint = _joint_support(net, frozenset(nets.support(m0)))
    if _exact_support_solvable(net, m0, joint):
        return joint
    return frozenset(cert_support)


def _joint_support(net: Net, sigma) -> frozenset:
    """Greatest transition set that is forward-justifiable from the
    place support sigma and backward-justifiable from the exit place."""
    rev = nets.reverse_net(net)
    cand = set(net.transitions)
    while True:
        fwd, _ = max_fireable_set(net, sigma, cand)
        bwd, _ = max_fireable_set(rev, {net.final_place}, fwd)
        if bwd == cand:
            return frozenset(cand)
        cand = bwd


def _exact_support_solvable(net: Net, m0, support) -> bool:
    """Whether the state equation from m0 to one exit token has a
    solution with amounts positive exactly on the support."""
    order = [t for t in net.transitions if t in support]
    if not order:
        return nets.canon(m0) == nets.canon({net.final_place: 1})
    sys = LinearSystem(order + ["__g"], nonneg=set(order))
    by_place = {}
    for t in order:
        for p, d in net.effect(t).items():
            by_place.setdefault(p, {})[t] = d
    for p in net.places:
        target = Fraction(1 if p == net.final_place else 0)
        sys.add(by_place.get(p, {}), EQ, target - Fraction(m0.get(p, 0)))
    for t in order:
        sys.add({t: -1, "__g": 1}, LE, 0)
    sys.add({"__g": 1}, LE, 1)
    res = lp_supremum(sys, {"__g": 1})
    return res.feasible and res.optimum > 0


def _block_support(script: SmtScript, net: Net, mvars, support,
                   round_id: int) -> None:
    """Exclude every marking that reaches the final marking through a
    run with exactly this transition support.

    The linear part is the projection of the state equation (with the
    support amounts strictly positive) onto the marking variables; the
    boolean part asserts forward realizability of the support from the
    marking's own support through fresh saturation-level booleans.
    """
    linear = _support_region(net, support)
    linear_terms = [_constraint_term(coeffs, rel, rhs, mvars)
                    for coeffs, rel, rhs in linear]
    real_terms = _realizability(script, net, mvars, support, round_id)
    parts = linear_terms + real_terms
    if not parts:
        body = "true"
    elif len(parts) == 1:
        body = parts[0]
    else:
        body = "(and " + " ".join(parts) + ")"
    script.assert_(f"(not {body})")


def _norm_row(coeffs, rel, rhs):
    """Scale a row to primitive integer coefficients (keeps later
    eliminations and probes from drowning in fraction growth)."""
    coeffs = {k: Fraction(c) for k, c in coeffs.items() if c}
    rhs = Fraction(rhs)
    if not coeffs:
        return coeffs, rel, rhs
    den = lcm(rhs.denominator, *(c.denominator for c in coeffs.values()))
    num = gcd(abs(rhs.numerator * den // rhs.denominator),
              *(abs(c.numerator * den // c.denominator)
                for c in coeffs.values()))
    scale = Fraction(den, num or 1)
    return {k: c * scale for k, c in coeffs.items()}, rel, rhs * scale


def _project_pruned(cons, elim):
    """Inequality projection by variable elimination with aggressive
    redundancy control: ancestry-bounded combination (a row combined
    from more than k+1 original rows after k eliminations is implied),
    dominance within equal coefficient vectors, and supremum-probe
    trimming whenever the row set grows. Exact, and keeps the
    intermediate systems near the size of the true projection.
    """
    rows = [(*_norm_row(coeffs, rel, rhs), frozenset((i,)))
            for i, (coeffs, rel, rhs) in enumerate(cons)]
    remaining = set(elim)
    k = 0
    while remaining:
        # prefer substitution through an equality mentioning a variable
        sub = next(((v, idx) for idx, r in enumerate(rows) if r[1] == EQ
                    for v in sorted(remaining) if r[0].get(v)), None)
        if sub is not None:
            v, idx = sub
            coeffs, _, rhs, hist = rows[idx]
            cv = coeffs[v]
            expr = {w: -c / cv for w, c in coeffs.items() if w != v}
            const = rhs / cv  # v = const + expr
            rest = []
            for j, (c2, r2, b2, h2) in enumerate(rows):
                if j == idx:
                    continue
                cv2 = c2.get(v, Fraction(0))
                if not cv2:
                    rest.append((c2, r2, b2, h2))
                    continue
                merged = {w: c for w, c in c2.items() if w != v}
                for w, c in expr.items():
                    merged[w] = merged.get(w, Fraction(0)) + cv2 * c
                rest.append((*_norm_row(merged, r2, b2 - cv2 * const),
                             h2 | hist))
        else:
            def cost(v):
                pos = sum(1 for r in rows if r[0].get(v, 0) > 0)
                neg = sum(1 for r in rows if r[0].get(v, 0) < 0)
                return pos * neg - pos - neg
            v = min(sorted(remaining), key=cost)
            uppers, lowers, rest = [], [], []
            for coeffs, rel, rhs, hist in rows:
                cv = coeffs.get(v, Fraction(0))
                if not cv:
                    rest.append((coeffs, rel, rhs, hist))
                    continue
                norm = {w: c / abs(cv) for w, c in coeffs.items() if w != v}
                (uppers if cv > 0 else lowers).append(
                    (norm, rel, rhs / abs(cv), hist))
            for uc, ur, ub, uh in uppers:
                for lc, lr, lb, lh in lowers:
                    hist = uh | lh
                    if len(hist) > k + 1:
                        continue
                    merged = dict(uc)
                    for w, c in lc.items():
                        merged[w] = merged.get(w, Fraction(0)) + c
                    rel = LT if LT in (ur, lr) else LE
                    rest.append((*_norm_row(merged, rel, ub + lb), hist))
        remaining.discard(v)
        k += 1
        rows = _dominance(rest)
        if len(rows) > 24:
            rows = _lp_trim(rows)
    rows = _lp_trim(rows)
    out = []
    for coeffs, rel, rhs, _ in rows:
        if rel == EQ:
            out.append((coeffs, LE, rhs))
            out.append(({w: -c for w, c in coeffs.items()}, LE, -rhs))
        else:
            out.append((coeffs, rel, rhs))
    return out


def _dominance(rows):
    """Within equal coefficient vectors keep the tightest row (least
    bound; strict beats non-strict at equal bound)."""
    best = {}
    eqs, seen_eq = [], set()
    for coeffs, rel, rhs, hist in rows:
        if rel == EQ:
            if not coeffs and rhs == 0:
                continue
            key = (tuple(sorted(coeffs.items())), rhs)
            if key not in seen_eq:
                seen_eq.add(key)
                eqs.append((coeffs, rel, rhs, hist))
            continue
        if not coeffs:
            if (rel == LE and rhs >= 0) or (rel == LT and rhs > 0):
                continue
        key = tuple(sorted(coeffs.items()))
        cur = best.get(key)
        if cur is None or rhs < cur[1] or (rhs == cur[1] and rel == LT):
            best[key] = (coeffs, rhs, rel, hist)
    return eqs + [(c, r, b, h) for c, b, r, h in best.values()]


def _lp_trim(rows):
    names = sorted({k for coeffs, _, _, _ in rows for k in coeffs})
    kept = list(rows)
    i = 0
    while i < len(kept):
        coeffs, rel, rhs, _ = kept[i]
        if rel == EQ:
            i += 1
            continue
        rest = kept[:i] + kept[i + 1:]
        res = lp_supremum(
            _row_system([(c, r, b) for c, r, b, _ in rest], names), coeffs)
        implied = (not res.feasible) or (
            res.optimum is not None
            and (res.optimum < rhs or (res.optimum == rhs and rel != LT)))
        if implied:
            kept = rest
        else:
            i += 1
    return kept


def _row_system(rows, names) -> LinearSystem:
    # strict rows enter relaxed: suprema over the closure only ever
    # overestimate, which keeps the implication probes conservative
    sys = LinearSystem(list(names))
    for coeffs, rel, rhs in rows:
        sys.add(coeffs, LE if rel == LT else rel, rhs)
    return sys


def _support_region(net: Net, support):
    """Constraints over place variables: the state equation to one exit
    token is solvable with amounts positive exactly on the support."""
    constraints = []
    order = [t for t in net.transitions if t in support]
    by_place = {}
    for t in order:
        for p, d in net.effect(t).items():
            by_place.setdefault(p, {})[("x", t)] = Fraction(d)
    for p in net.places:
        coeffs = dict(by_place.get(p, {}))
        coeffs[("m", p)] = Fraction(1)
        target = Fraction(1 if p == net.final_place else 0)
        constraints.append((coeffs, EQ, target))
    for t in order:
        constraints.append(({("x", t): Fraction(-1)}, LT, Fraction(0)))
    return _project_pruned(constraints, [("x", t) for t in order])


def _constraint_term(coeffs, rel, rhs, mvars) -> str:
    terms = []
    for key, c in sorted(coeffs.items(), key=lambda kv: kv[0][1]):
        var = mvars[key[1]]
        if c == 1:
            terms.append(var)
        else:
            terms.append(f"(* {num_text(c)} {var})")
    if not terms:
        lhs = "0"
    elif len(terms) == 1:
        lhs = terms[0]
    else:
        lhs = "(+ " + " ".join(terms) + ")"
    op = "<" if rel == LT else "<="
    return f"({op} {lhs} {num_text(rhs)})"


def _realizability(script: SmtScript, net: Net, mvars, support,
                   round_id: int) -> list:
    order = [t for t in net.transitions if t in support]
    if not order:
        return []
    levels = len(order)
    tsym = symtab(order)
    prev = {}
    for j in range(levels):
        cur = {}
        for t in order:
            cur[t] = script.declare(f"blk{round_id}-G{j}-{tsym[t]}", "Bool")
            per_place = []
            for p in net.pre.get(t, {}):
                options = [f"(> {mvars[p]} 0)"]
                if j > 0:
                    options += [prev[s] for s in net.producers(p)
                                if s in support]
                if len(options) == 1:
                    per_place.append(options[0])
                else:
                    per_place.append("(or " + " ".join(options) + ")")
            if not per_place:
                body = "true"
            elif len(per_place) == 1:
                body = per_place[0]
            else:
                body = "(and " + " ".join(per_place) + ")"
            script.assert_(f"(= {cur[t]} {body})")
        prev = cur
    return [prev[t] for t in order]


# ---------------------------------------------------------------------------
# Least-k minimization

@dataclass
class KBounds:
    k_z: int | None          # least k solving the integer state equation
    k_q: int | None          # least k with an integral-amount continuous run
    cap: int

    def chain_ok(self) -> bool:
        if self.k_z is None or self.k_q is None:
            return True
        return self.k_z <= self.k_q


def compute_k_z(net: Net, cap: int, solver=None, timeout=None,
                dump_dir=None) -> int | None:
    """Least k in [1..cap] such that k tokens on the entry place reach
    k on the exit place under the integer (state-equation) relaxation;
    None when no k up to the cap works."""
    script = SmtScript(logic="QF_LIA")
    script.declare("k", "Int")
    script.assert_("(>= k 1)")
    script.extend(emit_state_equation(
        net, {net.initial_place: "k"}, {net.final_place: "k"},
        x_integral=True, prefix="z"))
    _dump(script, dump_dir, "k-state-equation")
    return _linear_search(script, cap, solver, timeout)


def compute_k_q(net: Net, cap: int, solver=None, timeout=None,
                dump_dir=None) -> int | None:
    """Least k in [1..cap] with a continuous run of integral amounts
    from k entry tokens to k exit tokens; None when no k up to the cap
    works."""
    script = SmtScript(logic="QF_LIA")
    script.declare("k", "Int")
    script.assert_("(>= k 1)")
    script.extend(emit_psi(
        net, {net.initial_place: "k"}, {net.final_place: "k"},
        x_integral=True, prefix="q"))
    _dump(script, dump_dir, "k-integral-run")
    return _linear_search(script, cap, solver, timeout)


def _linear_search(script: SmtScript, cap: int, solver, timeout) -> int | None:
    """Incremental search k = 1, 2, ... with push/pop; linear because
    the underlying k-indexed property is not monotone in k."""
    if cap < 1:
        raise NetError("cap must be at least 1")
    with SolverSession(solver=solver, timeout=timeout) as session:
        session.send(script.text())
        for k in range(1, cap + 1):
            session.push()
            session.send(f"(assert (= k {k}))\n")
            status = session.check_sat()
            if status == "unknown":
                raise SolverError(f"solver returned unknown at k = {k}")
            if status == "sat":
                return k
            session.pop()
    return None

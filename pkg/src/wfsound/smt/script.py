"""SMT-LIB2 script construction for reachability relaxation queries.

The central encoding is `emit_psi`: a quantifier-free formula that is
satisfiable iff the source marking reaches the target marking under the
continuous-firing relaxation. It combines the state equation with
saturation-level booleans that express forward realizability of the
fired support from the source support and, in the reversed net,
backward realizability from the target support. One saturation level
per transition suffices because each saturation round adds at least one
transition to the fireable set. The level booleans are defined by
equivalences, so they are fully determined by unit propagation once the
linear atoms are fixed.

Scripts are byte-stable: identifiers are derived deterministically from
net identifiers in declaration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..nets import Net, reverse_net
from .sexpr import num_text


@dataclass
class SmtScript:
    """An SMT-LIB2 script fragment: logic, declarations, assertions.

    `meta` carries name maps (net id -> SMT symbol) so that callers can
    query models; it does not affect the emitted text.
    """

    logic: str = "QF_LRA"
    declarations: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def declare(self, name: str, sort: str) -> str:
        self.declarations.append(f"(declare-fun {name} () {sort})")
        return name

    def assert_(self, term: str) -> None:
        self.assertions.append(f"(assert {term})")

    def extend(self, other: "SmtScript") -> None:
        self.declarations.extend(other.declarations)
        self.assertions.extend(other.assertions)
        self.meta.update(other.meta)

    def text(self) -> str:
        lines = [f"(set-logic {self.logic})"]
        lines.extend(self.declarations)
        lines.extend(self.assertions)
        return "\n".join(lines) + "\n"


def symtab(names, prefix: str = "") -> dict:
    """Deterministic injective map from raw identifiers to SMT symbols."""
    out, used = {}, set()
    for name in names:
        base = prefix + "".join(
            c if c.isalnum() or c == "_" else "-" for c in name)
        if not base or base[0].isdigit():
            base = "s" + base
        cand, k = base, 1
        while cand in used:
            k += 1
            cand = f"{base}-{k}"
        used.add(cand)
        out[name] = cand
    return out


def _conj(terms) -> str:
    terms = [t for t in terms if t != "true"]
    if any(t == "false" for t in terms):
        return "false"
    if not terms:
        return "true"
    if len(terms) == 1:
        return terms[0]
    return "(and " + " ".join(terms) + ")"


def _disj(terms) -> str:
    terms = [t for t in terms if t != "false"]
    if any(t == "true" for t in terms):
        return "true"
    if not terms:
        return "false"
    if len(terms) == 1:
        return terms[0]
    return "(or " + " ".join(terms) + ")"


def _sum(terms) -> str:
    terms = [t for t in terms if t != "0"]
    if not terms:
        return "0"
    if len(terms) == 1:
        return terms[0]
    return "(+ " + " ".join(terms) + ")"


class MarkingTerms:
    """Per-place value and positivity terms for one side of a query.

    A marking entry is either a concrete rational or a string naming an
    SMT term; positivity of concrete entries folds to a constant.
    """

    def __init__(self, marking):
        self.marking = dict(marking)

    def value(self, place) -> str:
        v = self.marking.get(place, 0)
        if isinstance(v, str):
            return v
        return num_text(Fraction(v))

    def positive(self, place) -> str:
        v = self.marking.get(place, 0)
        if isinstance(v, str):
            return f"(> {v} 0)"
        return "true" if Fraction(v) > 0 else "false"


def emit_psi(net: Net, m, m2, x_integral: bool = False,
             prefix: str = "r") -> SmtScript:
    """Fragment satisfiable iff m reaches m2 under continuous firing.

    m and m2 map places to rationals or to SMT term strings (declared
    by the caller). With x_integral the firing amounts are
    integer-sorted, giving realizable runs with integral Parikh image.
    The fragment asserts the state equation, x >= 0, and forward plus
    backward saturation-level realizability.
    """
    script = SmtScript(logic="QF_LIRA" if x_integral else "QF_LRA")
    tsym = symtab(net.transitions)
    src, dst = MarkingTerms(m), MarkingTerms(m2)

    xs = {}
    for t in net.transitions:
        xs[t] = script.declare(f"{prefix}-x-{tsym[t]}",
                               "Int" if x_integral else "Real")
        script.assert_(f"(>= {xs[t]} 0)")
    script.meta[f"{prefix}:x"] = dict(xs)

    for p in net.places:
        terms = [src.value(p)]
        for t in net.transitions:
            delta = net.post.get(t, {}).get(p, 0) - net.pre.get(t, {}).get(p, 0)
            if delta == 1:
                terms.append(xs[t])
            elif delta:
                terms.append(f"(* {num_text(Fraction(delta))} {xs[t]})")
        script.assert_(f"(= {dst.value(p)} {_sum(terms)})")

    _levels(script, net, xs, src, tsym, f"{prefix}-F")
    _levels(script, reverse_net(net), xs, dst, tsym, f"{prefix}-B")
    return script


def _levels(script: SmtScript, net: Net, xs, side: MarkingTerms,
            tsym, tag: str) -> None:
    n = len(net.transitions)
    if n == 0:
        return
    prev = {}
    for j in range(n):
        cur = {}
        for t in net.transitions:
            cur[t] = script.declare(f"{tag}{j}-{tsym[t]}", "Bool")
            per_place = []
            for p in net.pre.get(t, {}):
                options = [side.positive(p)]
                if j > 0:
                    options += [f"(and {prev[s]} (> {xs[s]} 0))"
                                for s in net.producers(p)]
                per_place.append(_disj(options))
            body = _conj([f"(> {xs[t]} 0)"] + per_place)
            script.assert_(f"(= {cur[t]} {body})")
        prev = cur
    for t in net.transitions:
        script.assert_(f"(=> (> {xs[t]} 0) {prev[t]})")


def emit_state_equation(net: Net, m, m2, x_integral: bool = True,
                        prefix: str = "z") -> SmtScript:
    """State-equation-only fragment (integer reachability relaxation)."""
    script = SmtScript(logic="QF_LIRA" if x_integral else "QF_LRA")
    tsym = symtab(net.transitions)
    src, dst = MarkingTerms(m), MarkingTerms(m2)
    xs = {}
    for t in net.transitions:
        xs[t] = script.declare(f"{prefix}-x-{tsym[t]}",
                               "Int" if x_integral else "Real")
        script.assert_(f"(>= {xs[t]} 0)")
    script.meta[f"{prefix}:x"] = dict(xs)
    for p in net.places:
        terms = [src.value(p)]
        for t in net.transitions:
            delta = net.post.get(t, {}).get(p, 0) - net.pre.get(t, {}).get(p, 0)
            if delta == 1:
                terms.append(xs[t])
            elif delta:
                terms.append(f"(* {num_text(Fraction(delta))} {xs[t]})")
        script.assert_(f"(= {dst.value(p)} {_sum(terms)})")
    return script


def emit_soundness_query(net: Net) -> SmtScript:
    """The one-alternation continuous-soundness refutation query.

    Asserts the existence of a nonnegative marking m with psi(i:1, m)
    and, universally over the inner firing variables and level
    booleans, the negation of psi(m, f:1). Satisfiable iff the net is
    not continuously sound. Emitted for audit and for quantifier-capable
    backends; the default decision path is the counterexample-guided
    loop over quantifier-free queries.
    """
    script = SmtScript(logic="LRA")
    psym = symtab(net.places, prefix="m-")
    mvars = {p: psym[p] for p in net.places}
    for p in net.places:
        script.declare(mvars[p], "Real")
        script.assert_(f"(>= {mvars[p]} 0)")
    script.meta["m"] = dict(mvars)

    reach = emit_psi(net, {net.initial_place: 1}, mvars, prefix="a")
    script.declarations.extend(reach.declarations)
    script.assertions.extend(reach.assertions)

    inner = emit_psi(net, mvars, {net.final_place: 1}, prefix="b")
    bound = []
    for decl in inner.declarations:
        name = decl.split()[1]
        sort = decl.rstrip(")").split()[-1]
        bound.append(f"({name} {sort})")
    body_terms = [a[len("(assert "):-1] for a in inner.assertions]
    script.assertions.append(
        "(assert (forall (" + " ".join(bound) + ") (not "
        + _conj(body_terms) + ")))")
    return script

"""Solver-free decision procedures over reachability relaxations.

Continuous reachability is decided by a support fixpoint: alternately
shrink the candidate transition set by state-equation support probing,
forward firing saturation from the source support, and backward firing
saturation from the target support. Every accept carries a certificate
(Parikh vector plus forward/backward layering orders) that can be
re-checked independently; every reject carries the final fixpoint
support as diagnosis.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from . import nets
from .linprog import GE, EQ, LinearSystem, lp_feasible, lp_maximize
from .nets import Net, reverse_net, support


@dataclass
class CreachCertificate:
    reachable: bool
    parikh: dict | None = None            # transition -> positive rational
    forward_order: list | None = None     # layering of supp(parikh) from supp(m)
    backward_order: list | None = None    # same in the reversed net from supp(m')
    fixpoint_support: frozenset | None = None
    reason: str | None = None


def max_fireable_set(net: Net, marked, candidates):
    """Saturation: largest transition set firable (in the continuous
    sense) starting from any marking with the given support.

    Returns (set, levels) where levels[t] is the round in which t was
    first justified; t belongs iff its pre-support is covered by
    `marked` plus post-places of earlier members.
    """
    covered = set(marked)
    levels = {}
    remaining = [t for t in net.transitions if t in candidates]
    level = 0
    while True:
        added = []
        for t in remaining:
            if all(p in covered for p in net.pre[t]):
                added.append(t)
        if not added:
            return set(levels), levels
        for t in added:
            levels[t] = level
            covered.update(net.post[t])
        remaining = [t for t in remaining if t not in levels]
        level += 1


def _state_equation(net: Net, m, m2, supp_vars) -> LinearSystem:
    sys = LinearSystem(list(supp_vars), nonneg=set(supp_vars))
    by_place = {}
    for t in supp_vars:
        for p, d in net.effect(t).items():
            by_place.setdefault(p, {})[t] = d
    places = set(m) | set(m2) | set(by_place)
    for p in net.places:
        if p not in places:
            continue
        sys.add(by_place.get(p, {}), EQ,
                Fraction(m2.get(p, 0)) - Fraction(m.get(p, 0)))
    return sys


def decide_creach(net: Net, m, m2):
    """Decide whether m reaches m2 under the continuous firing semantics.

    Returns (bool, CreachCertificate).
    """
    m = nets.marking(m)
    m2 = nets.marking(m2)
    cand = list(net.transitions)
    while True:
        witnesses = {}
        sys = _state_equation(net, m, m2, cand)
        usable = []
        for t in cand:
            res = lp_maximize(sys, {t: 1}, 1)
            if res.feasible and res.optimum > 0:
                usable.append(t)
                witnesses[t] = res.assignment
        fwd, fwd_levels = max_fireable_set(net, support(m), set(usable))
        rev = reverse_net(net)
        bwd, bwd_levels = max_fireable_set(rev, support(m2), fwd)
        if bwd == set(cand):
            break
        cand = [t for t in cand if t in bwd]
    if not cand:
        if m == m2:
            return True, CreachCertificate(True, {}, [], [])
        return False, CreachCertificate(
            False, fixpoint_support=frozenset(),
            reason="state equation admits no usable transition")
    n = Fraction(len(cand))
    parikh = {t: sum(witnesses[s].get(t, 0) for s in cand) / n for t in cand}
    order = sorted(cand, key=lambda t: (fwd_levels[t], net.transitions.index(t)))
    border = sorted(cand, key=lambda t: (bwd_levels[t], net.transitions.index(t)))
    cert = CreachCertificate(True, parikh, order, border)
    assert verify_creach_certificate(net, m, m2, cert)
    return True, cert


def verify_creach_certificate(net: Net, m, m2, cert: CreachCertificate) -> bool:
    """Independent check of a reachability certificate."""
    if not cert.reachable or cert.parikh is None:
        return False
    m = nets.marking(m)
    m2 = nets.marking(m2)
    used = {t for t, v in cert.parikh.items() if v}
    if not used:
        return m == m2
    if any(Fraction(v) < 0 for v in cert.parikh.values()):
        return False
    delta = dict(m)
    for t, v in cert.parikh.items():
        for p, d in net.effect(t).items():
            delta[p] = delta.get(p, 0) + Fraction(v) * d
    if nets.marking(delta) != m2:
        return False
    return (_valid_layering(net, support(m), cert.forward_order, used)
            and _valid_layering(reverse_net(net), support(m2),
                                cert.backward_order, used))


def _valid_layering(net: Net, marked, order, used) -> bool:
    if order is None or set(order) != used or len(order) != len(used):
        return False
    covered = set(marked)
    for t in order:
        if not all(p in covered for p in net.pre[t]):
            return False
        covered.update(net.post[t])
    return True


# ---------------------------------------------------------------------------
# Continuous runs

def replay_continuous(net: Net, m, run):
    """Replay a list of (factor, transition) steps; returns the final
    marking or None when some place would go negative."""
    cur = {p: Fraction(v) for p, v in m.items() if v}
    for lam, t in run:
        lam = Fraction(lam)
        if not (0 < lam <= 1):
            return None
        for p, w in net.pre[t].items():
            if cur.get(p, 0) < lam * w:
                return None
        cur = nets.add_effect(cur, net.effect(t), lam)
    return cur


def replay_discrete(net: Net, m, run):
    cur = nets.marking(m)
    for t in run:
        if not nets.enabled(net, cur, t):
            return None
        cur = nets.fire(net, cur, t)
    return cur


def explore_discrete(net: Net, m, limit: int = 256) -> list:
    """Breadth-first discrete reachability from m, truncated at `limit`
    distinct markings; every returned marking is also continuously
    reachable from m."""
    start = nets.marking(m)
    seen = {nets.canon(start)}
    queue, out = [start], [start]
    while queue and len(out) < limit:
        cur = queue.pop(0)
        for t in net.transitions:
            if not nets.enabled(net, cur, t):
                continue
            nxt = nets.fire(net, cur, t)
            key = nets.canon(nxt)
            if key in seen:
                continue
            seen.add(key)
            queue.append(nxt)
            out.append(nxt)
            if len(out) >= limit:
                break
    return out


def rescale_run(direction: str, run, b: int):
    """Rescale between discrete runs from b-scaled markings and
    continuous runs with factor 1/b.

    to_continuous: transition list -> [(1/b, t)]; to_discrete: each
    (factor, t) becomes t repeated factor*b times, which must be a
    natural number.
    """
    if b < 1:
        raise ValueError("scale must be a positive natural")
    if direction == "to_continuous":
        lam = Fraction(1, b)
        return [(lam, t) for t in run]
    if direction == "to_discrete":
        out = []
        for lam, t in run:
            count = Fraction(lam) * b
            if count.denominator != 1:
                raise ValueError(f"factor {lam} does not scale to a natural with b={b}")
            out.extend([t] * count.numerator)
        return out
    raise ValueError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------------------
# Integer boundedness

@dataclass
class BoundednessResult:
    bounded: bool
    witness: dict | None = None  # transition -> natural, positive total effect

    @property
    def unbounded(self):
        return not self.bounded


def check_integer_boundedness(net: Net) -> BoundednessResult:
    """Marking-independent integer boundedness.

    Unbounded iff some nonnegative rational transition combination has
    strictly positive componentwise effect; by homogeneity this is the
    feasibility of Delta x >= 0 with total effect >= 1. A rational
    witness is scaled to integers.
    """
    ts = list(net.transitions)
    sys = LinearSystem(ts, nonneg=set(ts))
    total = {}
    by_place = {}
    for t in ts:
        for p, d in net.effect(t).items():
            by_place.setdefault(p, {})[t] = d
            total[t] = total.get(t, 0) + d
    for p, coeffs in by_place.items():
        sys.add(coeffs, GE, 0)
    if not total:
        return BoundednessResult(True)
    sys.add(total, GE, 1)
    res = lp_feasible(sys)
    if not res.feasible:
        return BoundednessResult(True)
    scale = lcm(*(Fraction(v).denominator for v in res.assignment.values()))
    witness = {t: int(Fraction(v) * scale) for t, v in res.assignment.items() if v}
    return BoundednessResult(False, witness)


def verify_unboundedness_witness(net: Net, witness) -> bool:
    delta = {}
    for t, v in witness.items():
        if v < 0:
            return False
        for p, d in net.effect(t).items():
            delta[p] = delta.get(p, 0) + v * d
    return all(v >= 0 for v in delta.values()) and any(v > 0 for v in delta.values())


# ---------------------------------------------------------------------------
# Redundant places

def coverable_places(net: Net, start_place=None) -> set:
    """Places markable by some continuous run from one token on the
    entry place (forward saturation is exact for this query)."""
    start = start_place or net.initial_place
    fired, _ = max_fireable_set(net, {start}, set(net.transitions))
    covered = {start}
    for t in fired:
        covered.update(net.post[t])
    return covered


def is_nonredundant(net: Net, p) -> bool:
    return p in coverable_places(net)


def remove_redundant_places(net: Net):
    """Drop places never markable from the entry place, along with the
    transitions consuming them. Returns (net, removed place list); if
    the result would not be a valid workflow net the input is returned
    unreduced."""
    covered = coverable_places(net)
    dead = [p for p in net.places if p not in covered]
    if not dead:
        return net, []
    fired, _ = max_fireable_set(net, {net.initial_place}, set(net.transitions))
    keep_t = [t for t in net.transitions if t in fired]
    keep_p = [p for p in net.places if p in covered]
    reduced = Net(
        net.name,
        keep_p,
        keep_t,
        {t: {p: w for p, w in net.pre[t].items() if p in covered} for t in keep_t},
        {t: {p: w for p, w in net.post[t].items() if p in covered} for t in keep_t},
        net.initial_place,
        net.final_place,
    )
    if nets.validate_workflow(reduced):
        warnings.warn("redundant-place removal would break the workflow shape; "
                      "returning the net unreduced")
        return net, []
    return reduced, dead

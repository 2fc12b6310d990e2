"""Constructors for the synthetic net families and transformations.

Families:
  nc      -- c-unsound but k-sound for every k < c
  sound   -- quasi-sound and sound exactly at multiples of c
  nquasi  -- never quasi-sound (state equation unsolvable for any k)
  nsound  -- quasi-sound exactly at multiples of c, never sound
plus the DNF-formula net whose continuous soundness coincides with
tautology of the formula, sequential chaining of workflow nets, and the
binary-counter gadget expanding arc weights into unit-weight structure.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .nets import Net, NetError, validate_workflow


@dataclass(frozen=True)
class DnfFormula:
    """DNF over variables x1..xm; clauses are sets of signed indices
    (negative = negated literal)."""

    variables: int
    clauses: tuple

    def __post_init__(self):
        for clause in self.clauses:
            for lit in clause:
                i = abs(lit)
                if not 1 <= i <= self.variables:
                    raise ValueError(f"literal {lit} out of range")
                if -lit in clause:
                    raise ValueError(f"clause contains both x{i} and !x{i}")

    def __str__(self):
        def fmt(clause):
            return "&".join(
                ("!" if lit < 0 else "") + f"x{abs(lit)}"
                for lit in sorted(clause, key=abs))
        return "|".join(fmt(c) for c in self.clauses)


def parse_dnf(text: str) -> DnfFormula:
    """Parse the CLI syntax: clauses split by '|', literals by '&',
    negation '!', variables x1..xm."""
    clauses = []
    top = 0
    for part in text.split("|"):
        clause = set()
        for raw in part.split("&"):
            lit = raw.strip()
            neg = lit.startswith("!")
            if neg:
                lit = lit[1:].strip()
            if not lit.startswith("x") or not lit[1:].isdigit():
                raise ValueError(f"bad literal {raw.strip()!r}")
            idx = int(lit[1:])
            if idx < 1:
                raise ValueError(f"bad literal {raw.strip()!r}")
            clause.add(-idx if neg else idx)
            top = max(top, idx)
        clauses.append(frozenset(clause))
    return DnfFormula(top, tuple(clauses))


def gen_random_dnf(m: int, k: int, seed) -> DnfFormula:
    """Random well-formed formula with m variables and k clauses,
    deterministic for a fixed seed."""
    if m > 20:
        raise ValueError("variable count capped at 20")
    rng = random.Random(seed)
    clauses = []
    for _ in range(k):
        size = rng.randint(1, m)
        chosen = rng.sample(range(1, m + 1), size)
        clauses.append(frozenset(
            i if rng.random() < 0.5 else -i for i in chosen))
    return DnfFormula(m, tuple(clauses))


# ---------------------------------------------------------------------------
# Parametric families

def gen_family(family: str, c: int) -> Net:
    if c < 1:
        raise ValueError("parameter c must be >= 1")
    if family == "nc":
        return Net(
            f"nc-{c}",
            ["i", "p", "r", "f"],
            ["t_i", "t_r", "t_f"],
            {"t_i": {"i": 1}, "t_r": {"p": c}, "t_f": {"p": 1, "r": 1}},
            {"t_i": {"p": c + 1}, "t_r": {"r": 1}, "t_f": {"f": 1}},
            "i", "f",
        )
    if family == "sound":
        return Net(
            f"sound-{c}",
            ["i", "f"],
            ["t"],
            {"t": {"i": c}},
            {"t": {"f": c}},
            "i", "f",
        )
    if family == "nquasi":
        if c < 2:
            raise ValueError("nquasi needs c >= 2 (output weight c-1 must be positive)")
        return Net(
            f"nquasi-{c}",
            ["i", "f"],
            ["t"],
            {"t": {"i": c}},
            {"t": {"f": c - 1}},
            "i", "f",
        )
    if family == "nsound":
        return Net(
            f"nsound-{c}",
            ["i", "u", "d", "f"],
            ["t_i", "t_u", "t_d"],
            {"t_i": {"i": 1}, "t_u": {"u": c, "d": 1}, "t_d": {"d": 2}},
            {"t_i": {"u": 1, "d": 1}, "t_u": {"f": 1}, "t_d": {"d": 1, "f": 1}},
            "i", "f",
        )
    raise ValueError(f"unknown family {family!r}")


# ---------------------------------------------------------------------------
# DNF net

def gen_dnf_net(formula: DnfFormula) -> Net:
    """Net whose continuous soundness holds iff the formula is a
    tautology.

    One token chooses a value per variable; each clause transition
    consumes the matching choice places and releases cleanup tokens;
    discard transitions absorb the unused choice of each variable; the
    final transition collects one cleanup token per variable.

    When a variable occurs in every clause its cleanup place can never
    be marked, leaving it without producers; if both of its value
    places still feed clause transitions the dead cleanup structure is
    dropped so the result keeps the workflow shape (reachable behavior
    is unchanged). A variable occurring in every clause with a single
    sign keeps the unproducible cleanup place: the opposite value place
    then deliberately has no live outlet, which is what makes the net
    unsound for such (never tautological) formulas.
    """
    m = formula.variables
    var_range = range(1, m + 1)
    in_every_clause = {
        i for i in var_range
        if formula.clauses and all(
            i in {abs(lit) for lit in c} for c in formula.clauses)
    }
    signs_used = {i: {lit > 0 for c in formula.clauses for lit in c
                      if abs(lit) == i} for i in var_range}
    pruned = {i for i in in_every_clause if len(signs_used[i]) == 2}
    places = ["i", "p_cl"]
    for i in var_range:
        places += [f"v{i}_unset", f"v{i}_1", f"v{i}_0"]
    for i in var_range:
        if i not in pruned:
            places.append(f"q{i}")
        places.append(f"r{i}")
    places.append("f")

    transitions, pre, post = [], {}, {}

    def add(t, p_in, p_out):
        transitions.append(t)
        pre[t] = p_in
        post[t] = p_out

    add("t_init", {"i": 1},
        {**{f"v{i}_unset": 1 for i in var_range}, "p_cl": 1})
    for i in var_range:
        add(f"set{i}_1", {f"v{i}_unset": 1}, {f"v{i}_1": 1})
        add(f"set{i}_0", {f"v{i}_unset": 1}, {f"v{i}_0": 1})
    for j, clause in enumerate(formula.clauses, start=1):
        used = {abs(lit) for lit in clause}
        p_in = {"p_cl": 1}
        for lit in sorted(clause, key=abs):
            p_in[f"v{abs(lit)}_{1 if lit > 0 else 0}"] = 1
        p_out = {}
        for i in var_range:
            p_out[f"r{i}" if i in used else f"q{i}"] = 1
        add(f"clause{j}", p_in, p_out)
    for i in var_range:
        if i in pruned:
            continue
        add(f"discard{i}_1", {f"v{i}_1": 1, f"q{i}": 1}, {f"r{i}": 1})
        add(f"discard{i}_0", {f"v{i}_0": 1, f"q{i}": 1}, {f"r{i}": 1})
    add("t_fin", {f"r{i}": 1 for i in var_range}, {"f": 1})

    return Net(f"dnf[{formula}]", places, transitions, pre, post, "i", "f")


def dnf_choice_invariant(formula: DnfFormula, i: int) -> dict:
    """Conservation law: one unit flows through variable i's choice."""
    return {"i": 1, f"v{i}_unset": 1, f"v{i}_1": 1, f"v{i}_0": 1, f"r{i}": 1, "f": 1}


def dnf_cleanup_invariant(formula: DnfFormula, i: int) -> dict:
    """Conservation law: one unit flows through variable i's cleanup."""
    inv = {"i": 1, "p_cl": 1, f"r{i}": 1, "f": 1}
    used_in_all = formula.clauses and all(
        i in {abs(lit) for lit in c} for c in formula.clauses)
    signs = {lit > 0 for c in formula.clauses for lit in c if abs(lit) == i}
    if not (used_in_all and len(signs) == 2):
        inv[f"q{i}"] = 1
    return inv


# ---------------------------------------------------------------------------
# Chaining

def chain(parts) -> Net:
    """Sequential composition: disjoint union with bridge transitions
    from each exit place to the next entry place."""
    parts = list(parts)
    if not parts:
        raise ValueError("chain of zero nets")
    for net in parts:
        bad = validate_workflow(net)
        if bad:
            raise NetError(f"chain input {net.name!r} invalid: {bad[0]}")
    places, transitions, pre, post = [], [], {}, {}
    for idx, net in enumerate(parts):
        ren = lambda x, idx=idx: f"n{idx}_{x}"
        places += [ren(p) for p in net.places]
        for t in net.transitions:
            transitions.append(ren(t))
            pre[ren(t)] = {ren(p): w for p, w in net.pre[t].items()}
            post[ren(t)] = {ren(p): w for p, w in net.post[t].items()}
        if idx > 0:
            bridge = f"bridge{idx}"
            transitions.append(bridge)
            pre[bridge] = {f"n{idx - 1}_{parts[idx - 1].final_place}": 1}
            post[bridge] = {f"n{idx}_{net.initial_place}": 1}
    return Net(
        "chain[" + ",".join(n.name for n in parts) + "]",
        places, transitions, pre, post,
        f"n0_{parts[0].initial_place}",
        f"n{len(parts) - 1}_{parts[-1].final_place}",
    )


# ---------------------------------------------------------------------------
# Arc-weight expansion

def _digits(b: int):
    out = []
    while b:
        out.append(b & 1)
        b >>= 1
    return out  # least significant first


def expand_weights(net: Net) -> Net:
    """Rewrite every arc weight >= 2 into a unit-weight binary-counter
    gadget, preserving k-soundness and k-quasi-soundness.

    A pre-weight b on (t, p) becomes an up-counter: tokens from p climb
    reversibly through doubling levels and t consumes one top token per
    set bit of b. A post-weight becomes a down-counter unfolding t's
    output into p one unit at a time.
    """
    if net.has_unit_weights():
        return net
    places = list(net.places)
    transitions = []
    pre = {}
    post = {}

    def add_t(t, p_in, p_out):
        transitions.append(t)
        pre[t] = p_in
        post[t] = p_out

    for t in net.transitions:
        new_pre = {}
        new_post = {}
        for p, b in net.pre[t].items():
            if b == 1:
                new_pre[p] = 1
                continue
            g = f"{t}__{p}__in"
            bits = _digits(b)
            n = len(bits)
            for i in range(1, n):
                places.append(f"{g}_l{i}")
            for i in range(1, n + 1):
                places.append(f"{g}_r{i}")
            add_t(f"{g}_load", {p: 1}, {f"{g}_l1": 1})
            if p != net.initial_place:
                # returning a loaded token matters when p has other
                # consumers; forbidden on the entry place, where it is
                # also never needed (nothing competes for its tokens)
                add_t(f"{g}_unload", {f"{g}_l1": 1}, {p: 1})
            add_t(f"{g}_up1", {f"{g}_l1": 1}, {f"{g}_r1": 1})
            add_t(f"{g}_dn1", {f"{g}_r1": 1}, {f"{g}_l1": 1})
            for i in range(2, n):
                step = {f"{g}_r{i - 1}": 1, f"{g}_l{i - 1}": 1}
                add_t(f"{g}_upl{i}", dict(step), {f"{g}_l{i}": 1})
                add_t(f"{g}_dnl{i}", {f"{g}_l{i}": 1}, dict(step))
                add_t(f"{g}_upr{i}", dict(step), {f"{g}_r{i}": 1})
                add_t(f"{g}_dnr{i}", {f"{g}_r{i}": 1}, dict(step))
            if n >= 2:
                step = {f"{g}_l{n - 1}": 1, f"{g}_r{n - 1}": 1}
                add_t(f"{g}_upr{n}", dict(step), {f"{g}_r{n}": 1})
                add_t(f"{g}_dnr{n}", {f"{g}_r{n}": 1}, dict(step))
            for i, bit in enumerate(bits, start=1):
                if bit:
                    new_pre[f"{g}_r{i}"] = 1
        for p, b in net.post[t].items():
            if b == 1:
                new_post[p] = 1
                continue
            g = f"{t}__{p}__out"
            bits = _digits(b)
            n = len(bits)
            for i in range(1, n + 1):
                places.append(f"{g}_d{i}")
            for i in range(1, n):
                places.append(f"{g}_h{i}")
            add_t(f"{g}_emit", {f"{g}_h1": 1}, {p: 1})
            add_t(f"{g}_low", {f"{g}_d1": 1}, {f"{g}_h1": 1})
            for i in range(2, n + 1):
                halved = {f"{g}_d{i - 1}": 1, f"{g}_h{i - 1}": 1}
                add_t(f"{g}_splitd{i}", {f"{g}_d{i}": 1}, dict(halved))
                if i <= n - 1:
                    add_t(f"{g}_splith{i}", {f"{g}_h{i}": 1}, dict(halved))
            for i, bit in enumerate(bits, start=1):
                if bit:
                    new_post[f"{g}_d{i}"] = 1
        add_t(t, new_pre, new_post)

    return Net(net.name + "~expanded", places, transitions, pre, post,
               net.initial_place, net.final_place)

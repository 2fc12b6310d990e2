"""Structural reduction rules for unit-weight workflow nets.

Each rule removes or fuses net elements while preserving integer
boundedness and continuous soundness (the preservation contracts are
property-tested, not assumed). Applications that would break workflow
validity are rolled back and the redex skipped, so the engine is total;
the entry and exit places are never removed or merged away.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .nets import Net, NetError, validate_workflow

RULES = ("R1", "R2", "R3", "R4", "R5", "R6")

# fixpoint order: cheap duplicate/self-loop removal first, fusions and
# ring merging after
FIXPOINT_ORDER = ("R2", "R3", "R1", "R4", "R5", "R6")


@dataclass
class ReductionStep:
    rule: str
    removed_places: list = field(default_factory=list)
    removed_transitions: list = field(default_factory=list)
    merged: dict = field(default_factory=dict)   # removed id -> kept id


@dataclass
class ReductionTrace:
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)


def apply_rule(net: Net, rule: str):
    """Reduce the first applicable redex of one rule.

    Returns (reduced net, trace step) or None when the rule does not
    apply anywhere; results failing workflow validation are discarded
    and the search moves to the next redex.
    """
    if rule not in RULES:
        raise NetError(f"unknown rule {rule!r}")
    if not net.has_unit_weights():
        raise NetError("reduction rules require unit arc weights")
    finder = _FINDERS[rule]
    for candidate in finder(net):
        reduced, step = candidate
        if not validate_workflow(reduced):
            return reduced, step
    return None


def reduce_fixpoint(net: Net):
    """Apply the rules in a fixed order until none fires."""
    if not net.has_unit_weights():
        raise NetError("reduction rules require unit arc weights")
    trace = ReductionTrace()
    changed = True
    while changed:
        changed = False
        for rule in FIXPOINT_ORDER:
            result = apply_rule(net, rule)
            while result is not None:
                net, step = result
                trace.steps.append(step)
                changed = True
                result = apply_rule(net, rule)
    return net, trace


# ---------------------------------------------------------------------------
# Redex enumeration, deterministic by declaration order

def _rebuild(net: Net, places=None, transitions=None, pre=None, post=None):
    return Net(
        net.name,
        net.places if places is None else places,
        net.transitions if transitions is None else transitions,
        net.pre if pre is None else pre,
        net.post if post is None else post,
        net.initial_place, net.final_place,
    )


def _drop_place(net: Net, p: str) -> Net:
    places = [q for q in net.places if q != p]
    pre = {t: {q: w for q, w in net.pre[t].items() if q != p}
           for t in net.transitions}
    post = {t: {q: w for q, w in net.post[t].items() if q != p}
            for t in net.transitions}
    return _rebuild(net, places=places, pre=pre, post=post)


def _drop_transitions(net: Net, dead) -> Net:
    keep = [t for t in net.transitions if t not in dead]
    return _rebuild(
        net, transitions=keep,
        pre={t: net.pre[t] for t in keep},
        post={t: net.post[t] for t in keep},
    )


def _columns(net: Net, p: str):
    return (tuple(net.pre[t].get(p, 0) for t in net.transitions),
            tuple(net.post[t].get(p, 0) for t in net.transitions))


def _find_r1(net: Net):
    # duplicate place: p carries the same pre/post column as some other
    # place q; p is dropped, q kept
    cols = {}
    for p in net.places:
        cols.setdefault(_columns(net, p), []).append(p)
    for group in cols.values():
        keep = [p for p in group if p in (net.initial_place, net.final_place)]
        rest = [p for p in group if p not in keep]
        if keep and rest:
            drop = rest
        elif len(rest) >= 2:
            drop = rest[1:]
        else:
            continue
        for p in drop:
            yield _drop_place(net, p), ReductionStep(
                "R1", removed_places=[p], merged={p: (keep + rest)[0]})


def _find_r2(net: Net):
    # duplicate transition
    seen = {}
    for t in net.transitions:
        key = (tuple(sorted(net.pre[t].items())),
               tuple(sorted(net.post[t].items())))
        if key in seen:
            yield _drop_transitions(net, {t}), ReductionStep(
                "R2", removed_transitions=[t], merged={t: seen[key]})
        else:
            seen[key] = t


def _find_r3(net: Net):
    # self-loop transition
    for t in net.transitions:
        if net.pre[t] == net.post[t]:
            yield _drop_transitions(net, {t}), ReductionStep(
                "R3", removed_transitions=[t])


def _find_r4(net: Net):
    # transition-place fusion: t's single output place p is consumed by
    # transitions that inherit pre(t); t's input places feed only t
    for p in net.places:
        if p in (net.initial_place, net.final_place):
            continue
        prods = net.producers(p)
        if len(prods) != 1:
            continue
        t = prods[0]
        if net.post[t] != {p: 1}:
            continue
        if any(set(net.consumers(q)) != {t} for q in net.pre[t]):
            continue
        consumers = net.consumers(p)
        if t in consumers:
            continue
        pre = dict(net.pre)
        for s in consumers:
            merged = {q: w for q, w in net.pre[s].items() if q != p}
            clash = False
            for q, w in net.pre[t].items():
                if q in merged:
                    clash = True
                merged[q] = merged.get(q, 0) + w
            if clash:
                break
            pre[s] = merged
        else:
            fused = _drop_transitions(_rebuild(net, pre=pre), {t})
            yield _drop_place(fused, p), ReductionStep(
                "R4", removed_places=[p], removed_transitions=[t])


def _find_r5(net: Net):
    # place-transition fusion, the mirror of R4: p's single consumer t
    # hands post(t) to p's producers; t's output places have no other
    # producer
    for p in net.places:
        if p in (net.initial_place, net.final_place):
            continue
        cons = net.consumers(p)
        if len(cons) != 1:
            continue
        t = cons[0]
        if net.pre[t] != {p: 1}:
            continue
        if any(set(net.producers(q)) != {t} for q in net.post[t]):
            continue
        producers = net.producers(p)
        if t in producers:
            continue
        post = dict(net.post)
        for s in producers:
            merged = {q: w for q, w in net.post[s].items() if q != p}
            clash = False
            for q, w in net.post[t].items():
                if q in merged:
                    clash = True
                merged[q] = merged.get(q, 0) + w
            if clash:
                break
            post[s] = merged
        else:
            fused = _drop_transitions(_rebuild(net, post=post), {t})
            yield _drop_place(fused, p), ReductionStep(
                "R5", removed_places=[p], removed_transitions=[t])


def _transfer_arcs(net: Net):
    out = {}
    for t in net.transitions:
        if len(net.pre[t]) == 1 and len(net.post[t]) == 1:
            (p, wp), = net.pre[t].items()
            (q, wq), = net.post[t].items()
            if wp == 1 and wq == 1 and p != q:
                out[t] = (p, q)
    return out


def _find_r6(net: Net):
    # ring removal: places connected into a strongly connected transfer
    # graph hold interchangeable tokens and collapse into one place
    transfers = _transfer_arcs(net)
    adj, radj = {}, {}
    for t, (p, q) in transfers.items():
        adj.setdefault(p, set()).add(q)
        radj.setdefault(q, set()).add(p)

    def closure(start, edges):
        seen, todo = {start}, [start]
        while todo:
            for q in edges.get(todo.pop(), ()):
                if q not in seen:
                    seen.add(q)
                    todo.append(q)
        return seen

    seen_rings = set()
    for p in net.places:
        ring = frozenset(closure(p, adj) & closure(p, radj))
        if len(ring) < 2 or ring in seen_rings:
            continue
        seen_rings.add(ring)
        if net.initial_place in ring and net.final_place in ring:
            continue
        if net.initial_place in ring:
            rep = net.initial_place
        elif net.final_place in ring:
            rep = net.final_place
        else:
            rep = next(q for q in net.places if q in ring)
        dead = {t for t, (a, b) in transfers.items()
                if a in ring and b in ring}
        # only pure transfers may touch more than one ring place, else
        # the merge would create non-unit weights
        if any(len(set(net.pre[t]) & ring) + len(set(net.post[t]) & ring) > 1
               for t in net.transitions if t not in dead):
            continue

        def remap(weights):
            return {(rep if q in ring else q): w for q, w in weights.items()}

        keep = [t for t in net.transitions if t not in dead]
        merged = _rebuild(
            net,
            places=[q for q in net.places if q == rep or q not in ring],
            transitions=keep,
            pre={t: remap(net.pre[t]) for t in keep},
            post={t: remap(net.post[t]) for t in keep},
        )
        yield merged, ReductionStep(
            "R6",
            removed_places=[q for q in net.places
                            if q in ring and q != rep],
            removed_transitions=sorted(dead, key=net.transitions.index),
            merged={q: rep for q in ring if q != rep},
        )


_FINDERS = {
    "R1": _find_r1,
    "R2": _find_r2,
    "R3": _find_r3,
    "R4": _find_r4,
    "R5": _find_r5,
    "R6": _find_r6,
}

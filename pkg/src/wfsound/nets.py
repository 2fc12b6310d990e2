"""Petri-net and workflow-net data model.

Nets carry natural arc weights (unit weights are the common special case).
Markings are sparse dicts from place id to token count; rational markings
use Fraction values. Nets are immutable after construction and safe to
share between threads.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from fractions import Fraction
from typing import Iterable, Mapping


class NetError(ValueError):
    """Malformed net structure or input."""


class Net:
    """A Petri net with natural arc weights and optional entry/exit places.

    ``pre[t]`` and ``post[t]`` are sparse maps from place id to weight;
    absent keys mean weight 0. Iteration order of places and transitions
    is their declaration order, so everything derived from a net
    (verdicts, emitted solver scripts, serialized JSON) is deterministic.
    """

    __slots__ = (
        "name", "places", "transitions", "pre", "post",
        "initial_place", "final_place",
        "_place_set", "_producers", "_consumers",
    )

    def __init__(self, name, places, transitions, pre, post,
                 initial_place=None, final_place=None):
        self.name = name
        self.places = tuple(places)
        self._place_set = set(self.places)
        if len(self._place_set) != len(self.places):
            raise NetError("duplicate place id")
        seen = set()
        tids = []
        for t in transitions:
            if t in seen or t in self._place_set:
                raise NetError(f"duplicate or clashing id {t!r}")
            seen.add(t)
            tids.append(t)
        self.transitions = tuple(tids)
        self.pre = {t: dict(pre.get(t, {})) for t in self.transitions}
        self.post = {t: dict(post.get(t, {})) for t in self.transitions}
        for arcs in (self.pre, self.post):
            for t, weights in arcs.items():
                for p, w in weights.items():
                    if p not in self._place_set:
                        raise NetError(f"arc of {t!r} references unknown place {p!r}")
                    if not isinstance(w, int) or w < 1:
                        raise NetError(f"arc weight {w!r} on ({t!r}, {p!r}) must be a positive integer")
        for p in (initial_place, final_place):
            if p is not None and p not in self._place_set:
                raise NetError(f"designated place {p!r} not declared")
        self.initial_place = initial_place
        self.final_place = final_place
        self._producers = {p: [] for p in self.places}
        self._consumers = {p: [] for p in self.places}
        for t in self.transitions:
            for p in self.pre[t]:
                self._consumers[p].append(t)
            for p in self.post[t]:
                self._producers[p].append(t)

    def effect(self, t) -> dict:
        """Delta(t) = post(t) - pre(t) as a sparse signed map."""
        delta = dict(self.post[t])
        for p, w in self.pre[t].items():
            d = delta.get(p, 0) - w
            if d:
                delta[p] = d
            else:
                delta.pop(p, None)
        return delta

    def producers(self, p):
        """Transitions with a post arc into p, in declaration order."""
        return tuple(self._producers[p])

    def consumers(self, p):
        """Transitions with a pre arc from p, in declaration order."""
        return tuple(self._consumers[p])

    def has_unit_weights(self) -> bool:
        return all(
            w == 1
            for arcs in (self.pre, self.post)
            for weights in arcs.values()
            for w in weights.values()
        )

    def __eq__(self, other):
        if not isinstance(other, Net):
            return NotImplemented
        return (
            self.places == other.places
            and self.transitions == other.transitions
            and self.pre == other.pre
            and self.post == other.post
            and self.initial_place == other.initial_place
            and self.final_place == other.final_place
        )

    def __hash__(self):
        return hash((self.places, self.transitions))

    def __repr__(self):
        return (f"Net({self.name!r}, |P|={len(self.places)}, "
                f"|T|={len(self.transitions)})")


# ---------------------------------------------------------------------------
# Markings

def marking(pairs: Mapping | Iterable = ()) -> dict:
    """Build a sparse marking, dropping zero entries."""
    items = pairs.items() if isinstance(pairs, Mapping) else pairs
    return {p: v for p, v in items if v}

def canon(m: Mapping) -> tuple:
    """Canonical hashable form: sorted nonzero (place, count) pairs."""
    return tuple(sorted((p, v) for p, v in m.items() if v))

def support(m: Mapping) -> frozenset:
    return frozenset(p for p, v in m.items() if v)

def add_effect(m: Mapping, delta: Mapping, scale=1) -> dict:
    out = dict(m)
    for p, d in delta.items():
        v = out.get(p, 0) + scale * d
        if v:
            out[p] = v
        else:
            out.pop(p, None)
    return out

def geq(m: Mapping, lower: Mapping) -> bool:
    return all(m.get(p, 0) >= w for p, w in lower.items())

def enabled(net: Net, m: Mapping, t) -> bool:
    return geq(m, net.pre[t])

def fire(net: Net, m: Mapping, t) -> dict:
    """Fire t from m; raises if t is not enabled."""
    if not enabled(net, m, t):
        raise NetError(f"transition {t!r} not enabled")
    return add_effect(m, net.effect(t))


# ---------------------------------------------------------------------------
# Parsing and serialization

def loads_json(text: str) -> Net:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    try:
        transitions = [t["id"] for t in data["transitions"]]
        pre = {t["id"]: {p: int(w) for p, w in t.get("pre", {}).items()}
               for t in data["transitions"]}
        post = {t["id"]: {p: int(w) for p, w in t.get("post", {}).items()}
                for t in data["transitions"]}
        return Net(
            data.get("name", ""),
            data["places"],
            transitions,
            pre,
            post,
            data.get("initial_place"),
            data.get("final_place"),
        )
    except (KeyError, TypeError) as exc:
        raise NetError(f"malformed net JSON: missing or bad element {exc}") from None


def dumps_json(net: Net) -> str:
    """Canonical JSON export: sorted keys, LF line endings."""
    data = {
        "name": net.name,
        "places": list(net.places),
        "transitions": [
            {"id": t, "pre": dict(net.pre[t]), "post": dict(net.post[t])}
            for t in net.transitions
        ],
        "initial_place": net.initial_place,
        "final_place": net.final_place,
    }
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def loads_pnml(text: str, initial=None, final=None) -> Net:
    """Parse the basic PNML place/transition/arc subset.

    Arc inscriptions are read as integer weights (default 1); unknown
    elements are ignored. When initial/final are not given, a unique
    source place (no incoming arcs) and sink place (no outgoing arcs)
    are used if they exist.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise NetError(f"invalid PNML: {exc}") from None
    places, transitions, arcs = [], [], []
    for el in root.iter():
        tag = _strip_ns(el.tag)
        if tag == "place":
            places.append(el.get("id"))
        elif tag == "transition":
            transitions.append(el.get("id"))
        elif tag == "arc":
            weight = 1
            for sub in el.iter():
                if _strip_ns(sub.tag) in ("inscription", "text") and sub.text:
                    try:
                        weight = int(sub.text.strip())
                    except ValueError:
                        pass
            arcs.append((el.get("id"), el.get("source"), el.get("target"), weight))
    if any(pid is None for pid in places + transitions):
        raise NetError("PNML node without id")
    place_set, trans_set = set(places), set(transitions)
    pre = {t: {} for t in transitions}
    post = {t: {} for t in transitions}
    incoming, outgoing = set(), set()
    for aid, src, dst, w in arcs:
        if src in place_set and dst in trans_set:
            pre[dst][src] = pre[dst].get(src, 0) + w
            outgoing.add(src)
        elif src in trans_set and dst in place_set:
            post[src][dst] = post[src].get(dst, 0) + w
            incoming.add(dst)
        else:
            raise NetError(f"arc {aid!r} connects nodes of the same kind")
    name = root.get("id") or ""
    for el in root.iter():
        if _strip_ns(el.tag) == "net":
            name = el.get("id") or name
            break
    if initial is None:
        sources = [p for p in places if p not in incoming]
        initial = sources[0] if len(sources) == 1 else None
    if final is None:
        sinks = [p for p in places if p not in outgoing]
        final = sinks[0] if len(sinks) == 1 else None
    return Net(name, places, transitions, pre, post, initial, final)


def load(source, fmt=None, initial=None, final=None) -> Net:
    """Load a net from a path or raw text, in JSON or PNML format.

    fmt is "json" or "pnml"; when omitted it is guessed from the file
    suffix or the first non-blank character.
    """
    from pathlib import Path

    if isinstance(source, Path) or (
        isinstance(source, str) and "\n" not in source and not source.lstrip().startswith(("{", "<"))
    ):
        path = Path(source)
        text = path.read_text()
        if fmt is None:
            fmt = "pnml" if path.suffix.lower() in (".pnml", ".xml") else "json"
    else:
        text = source
        if fmt is None:
            fmt = "pnml" if text.lstrip().startswith("<") else "json"
    if fmt == "json":
        net = loads_json(text)
        if initial is not None or final is not None:
            net = Net(net.name, net.places, net.transitions, net.pre, net.post,
                      initial or net.initial_place, final or net.final_place)
        return net
    if fmt == "pnml":
        return loads_pnml(text, initial, final)
    raise NetError(f"unknown format {fmt!r}")


def save(net: Net, path) -> None:
    from pathlib import Path

    Path(path).write_text(dumps_json(net))


# ---------------------------------------------------------------------------
# Structural checks

def validate_workflow(net: Net) -> list:
    """Check the workflow-net shape; an empty list means the net is valid.

    Requires designated distinct entry/exit places, no production into
    the entry place, no consumption from the exit place, and every node
    on a directed path from entry to exit.
    """
    violations = []
    i, f = net.initial_place, net.final_place
    if i is None or f is None:
        violations.append("initial or final place not designated")
        return violations
    if i == f:
        violations.append("initial and final place coincide")
    for t in net.transitions:
        if i in net.post[t]:
            violations.append(f"transition {t!r} produces into initial place")
        if f in net.pre[t]:
            violations.append(f"transition {t!r} consumes from final place")
    forward = _graph_closure(net, {i}, forward=True)
    backward = _graph_closure(net, {f}, forward=False)
    for node in list(net.places) + list(net.transitions):
        if node not in forward or node not in backward:
            violations.append(f"node {node!r} not on a path from initial to final place")
    return violations


def _graph_closure(net: Net, start, forward=True):
    seen = set(start)
    stack = list(start)
    while stack:
        node = stack.pop()
        if node in net._place_set:
            nxt = net.consumers(node) if forward else net.producers(node)
        else:
            arcs = net.post[node] if forward else net.pre[node]
            nxt = arcs.keys()
        for n in nxt:
            if n not in seen:
                seen.add(n)
                stack.append(n)
    return seen


def is_free_choice(net: Net) -> bool:
    """Any two transitions have disjoint pre-supports or equal pre-vectors."""
    ts = net.transitions
    for a in range(len(ts)):
        pre_a = net.pre[ts[a]]
        sup_a = set(pre_a)
        for b in range(a + 1, len(ts)):
            pre_b = net.pre[ts[b]]
            if sup_a.isdisjoint(pre_b):
                continue
            if pre_a != pre_b:
                return False
    return True


def reverse_net(net: Net) -> Net:
    """Reverse every transition and swap the entry/exit places."""
    return Net(
        net.name + "~rev",
        net.places,
        net.transitions,
        {t: net.post[t] for t in net.transitions},
        {t: net.pre[t] for t in net.transitions},
        net.final_place,
        net.initial_place,
    )


def is_place_invariant(net: Net, x: Mapping, over=None) -> bool:
    """True iff the weighting x is conserved by every transition in `over`.

    x maps places to rationals; `over` defaults to all transitions.
    """
    if over is None:
        over = net.transitions
    for t in over:
        lhs = sum(Fraction(w) * Fraction(x.get(p, 0)) for p, w in net.pre[t].items())
        rhs = sum(Fraction(w) * Fraction(x.get(p, 0)) for p, w in net.post[t].items())
        if lhs != rhs:
            return False
    return True

"""Ground-truth explicit-state exploration for small instances.

Everything here is brute force on purpose: breadth-first marking
enumeration with deduplication, graph-based soundness and liveness
checks, bounded state-equation search, and DNF tautology by assignment
enumeration. These are the arbiters the relaxation-based procedures are
tested against.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import product

from . import nets
from .nets import Net

DEFAULT_CAP = 10 ** 6


class CapExceeded(Exception):
    """Exploration hit the node cap; never silently a verdict."""

    def __init__(self, cap):
        super().__init__(f"exploration cap {cap} exceeded")
        self.cap = cap


@dataclass
class ReachGraph:
    nodes: list            # canonical marking tuples, BFS order
    edges: list            # (src index, transition, dst index)
    root: tuple
    complete: bool
    cap: int
    index: dict            # canonical marking -> node index
    parent: dict           # node index -> parent node index (BFS tree)

    def marking(self, idx) -> dict:
        return dict(self.nodes[idx])

    def successors(self):
        succ = [[] for _ in self.nodes]
        for s, _, d in self.edges:
            succ[s].append(d)
        return succ

    def predecessors(self):
        pred = [[] for _ in self.nodes]
        for s, _, d in self.edges:
            pred[d].append(s)
        return pred


def explore(net: Net, m0, cap: int = DEFAULT_CAP) -> ReachGraph:
    """BFS over the firing relation from m0, deduplicated, capped."""
    root = nets.canon(m0)
    nodes = [root]
    index = {root: 0}
    parent = {0: None}
    edges = []
    queue = deque([0])
    complete = True
    while queue:
        src = queue.popleft()
        m = dict(nodes[src])
        for t in net.transitions:
            if not nets.enabled(net, m, t):
                continue
            m2 = nets.fire(net, m, t)
            key = nets.canon(m2)
            dst = index.get(key)
            if dst is None:
                if len(nodes) >= cap:
                    complete = False
                    continue
                dst = len(nodes)
                nodes.append(key)
                index[key] = dst
                parent[dst] = src
                queue.append(dst)
            edges.append((src, t, dst))
    return ReachGraph(nodes, edges, root, complete, cap, index, parent)


def _backward_closure(graph: ReachGraph, targets) -> set:
    pred = graph.predecessors()
    seen = set(targets)
    stack = list(targets)
    while stack:
        n = stack.pop()
        for p in pred[n]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def oracle_k_sound(net: Net, k: int, cap: int = DEFAULT_CAP):
    """Exact k-soundness by exhaustive exploration.

    Returns (True, None) or (False, counterexample marking); raises
    CapExceeded when the reachability graph does not fit under cap.
    """
    graph = explore(net, {net.initial_place: k}, cap)
    if not graph.complete:
        raise CapExceeded(cap)
    goal = nets.canon({net.final_place: k})
    goal_idx = graph.index.get(goal)
    good = _backward_closure(graph, [goal_idx]) if goal_idx is not None else set()
    for idx in range(len(graph.nodes)):
        if idx not in good:
            return False, graph.marking(idx)
    return True, None


def oracle_k_quasi_sound(net: Net, k: int, cap: int = DEFAULT_CAP) -> bool:
    graph = explore(net, {net.initial_place: k}, cap)
    goal = nets.canon({net.final_place: k})
    if goal in graph.index:
        return True
    if not graph.complete:
        raise CapExceeded(cap)
    return False


@dataclass
class BoundedReport:
    bounded: bool
    max_per_place: dict | None = None
    witness: tuple | None = None  # (smaller marking, strictly larger marking)
    conclusive: bool = True


def oracle_bounded(net: Net, m0, cap: int = DEFAULT_CAP) -> BoundedReport:
    """Boundedness from m0 via BFS with ancestor domination checks.

    A strictly dominated ancestor on the BFS tree witnesses growth; a
    completed exploration witnesses boundedness with per-place maxima.
    """
    graph = explore(net, m0, cap)
    for idx in range(len(graph.nodes)):
        m = graph.marking(idx)
        anc = graph.parent[idx]
        while anc is not None:
            ma = graph.marking(anc)
            if nets.geq(m, ma) and m != ma:
                return BoundedReport(False, witness=(graph.nodes[anc], graph.nodes[idx]))
            anc = graph.parent[anc]
    if not graph.complete:
        return BoundedReport(True, conclusive=False)
    maxima = {}
    for key in graph.nodes:
        for p, v in key:
            if v > maxima.get(p, 0):
                maxima[p] = v
    return BoundedReport(True, max_per_place=maxima)


def quasi_live_set(net: Net, m, cap: int = DEFAULT_CAP) -> set:
    """Transitions enabled at some reachable marking."""
    graph = explore(net, m, cap)
    if not graph.complete:
        raise CapExceeded(cap)
    out = set()
    for _, t, _ in graph.edges:
        out.add(t)
    return out


def live_set(net: Net, m, cap: int = DEFAULT_CAP) -> set:
    """Transitions re-enablable from every reachable marking."""
    graph = explore(net, m, cap)
    if not graph.complete:
        raise CapExceeded(cap)
    enabling = {}
    for s, t, _ in graph.edges:
        enabling.setdefault(t, set()).add(s)
    n = len(graph.nodes)
    out = set()
    for t, sources in enabling.items():
        if len(_backward_closure(graph, sources)) == n:
            out.add(t)
    return out


def zreach_bounded_witness(net: Net, m, m2, bound: int):
    """Brute-force search for a natural state-equation solution with all
    firing counts <= bound; a semi-oracle for integer reachability."""
    ts = list(net.transitions)
    diff = {}
    for p in set(m) | set(m2):
        d = m2.get(p, 0) - m.get(p, 0)
        if d:
            diff[p] = d
    effects = [net.effect(t) for t in ts]
    for combo in product(range(bound + 1), repeat=len(ts)):
        acc = {}
        for x, eff in zip(combo, effects):
            if not x:
                continue
            for p, d in eff.items():
                acc[p] = acc.get(p, 0) + x * d
        if {p: v for p, v in acc.items() if v} == diff:
            return {t: x for t, x in zip(ts, combo) if x}
    return None


# ---------------------------------------------------------------------------
# DNF formulas

MAX_DNF_VARS = 20


def dnf_tautology(formula) -> bool:
    """True iff every assignment satisfies some clause.

    `formula` exposes `variables` (count) and `clauses` (sets of signed
    indices, negative = negated); enumeration is guarded at 20 variables.
    """
    n = formula.variables
    if n > MAX_DNF_VARS:
        raise ValueError(f"too many variables ({n} > {MAX_DNF_VARS})")
    clauses = [frozenset(c) for c in formula.clauses]
    if not clauses:
        return False
    for bits in product((False, True), repeat=n):
        def holds(lit):
            return bits[abs(lit) - 1] == (lit > 0)
        if not any(all(holds(l) for l in clause) for clause in clauses):
            return False
    return True

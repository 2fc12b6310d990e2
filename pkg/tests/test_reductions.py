import random

import pytest

from wfsound import oracle, reach
from wfsound.generators import chain, gen_family
from wfsound.nets import Net, NetError, validate_workflow
from wfsound.reductions import RULES, apply_rule, reduce_fixpoint
from wfsound.soundness import check_continuous_soundness

from util import diamond, random_workflow


def _with_duplicate_transition() -> Net:
    return Net(
        "dup-t", ["i", "p", "f"], ["s", "s2", "u"],
        {"s": {"i": 1}, "s2": {"i": 1}, "u": {"p": 1}},
        {"s": {"p": 1}, "s2": {"p": 1}, "u": {"f": 1}},
        "i", "f",
    )


def test_r2_removes_duplicate_transition():
    net, step = apply_rule(_with_duplicate_transition(), "R2")
    assert step.rule == "R2" and step.removed_transitions == ["s2"]
    assert step.merged == {"s2": "s"}
    assert set(net.transitions) == {"s", "u"}
    assert not validate_workflow(net)


def test_r3_removes_self_loop():
    base = Net(
        "loop", ["i", "p", "f"], ["s", "t_loop", "u"],
        {"s": {"i": 1}, "t_loop": {"p": 1}, "u": {"p": 1}},
        {"s": {"p": 1}, "t_loop": {"p": 1}, "u": {"f": 1}},
        "i", "f",
    )
    net, step = apply_rule(base, "R3")
    assert step.removed_transitions == ["t_loop"]
    assert set(net.transitions) == {"s", "u"}


def test_r1_removes_duplicate_place():
    base = Net(
        "dup-p", ["i", "p", "q", "f"], ["s", "u"],
        {"s": {"i": 1}, "u": {"p": 1, "q": 1}},
        {"s": {"p": 1, "q": 1}, "u": {"f": 1}},
        "i", "f",
    )
    net, step = apply_rule(base, "R1")
    assert step.rule == "R1" and step.removed_places == ["q"]
    assert step.merged == {"q": "p"}
    # contract: the removed place always carried the same count as its
    # duplicate, checked over the full reachability graph
    graph = oracle.explore(base, {"i": 1}, cap=1000)
    for node in graph.nodes:
        m = dict(node)
        assert m.get("p", 0) == m.get("q", 0)


def test_r4_fuses_chain_bridge():
    toy = gen_family("sound", 1)
    composite = chain([toy, toy])
    net, trace = reduce_fixpoint(composite)
    assert len(net.places) < len(composite.places)
    assert not validate_workflow(net)
    assert any(s.rule in ("R4", "R5") for s in trace.steps)


def test_fixpoint_on_irreducible_net():
    # nc-1 is weighted, so reduction must refuse it
    with pytest.raises(NetError):
        reduce_fixpoint(gen_family("nc", 1))
    reduced, trace = reduce_fixpoint(_with_duplicate_transition())
    again, trace2 = reduce_fixpoint(reduced)
    assert again == reduced and len(trace2) == 0


def test_fixpoint_preserves_entry_exit_and_size():
    rng = random.Random(17)
    for _ in range(30):
        net = random_workflow(rng)
        reduced, trace = reduce_fixpoint(net)
        assert not validate_workflow(reduced)
        assert reduced.initial_place == "i" and reduced.final_place == "f"
        assert (len(reduced.places) + len(reduced.transitions)
                <= len(net.places) + len(net.transitions))


def test_rules_preserve_verdicts():
    # every single rule application must leave integer boundedness and
    # continuous soundness unchanged
    rng = random.Random(41)
    applications = 0
    while applications < 60:
        net = random_workflow(rng)
        for rule in RULES:
            result = apply_rule(net, rule)
            if result is None:
                continue
            reduced, _ = result
            applications += 1
            assert (reach.check_integer_boundedness(reduced).bounded
                    == reach.check_integer_boundedness(net).bounded)
            assert (check_continuous_soundness(reduced).sound
                    == check_continuous_soundness(net).sound)


def test_reduction_preserves_diamond_soundness():
    reduced, trace = reduce_fixpoint(diamond())
    assert len(trace) > 0
    assert check_continuous_soundness(reduced).sound

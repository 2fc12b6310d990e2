import random
from dataclasses import replace
from fractions import Fraction

import pytest

from wfsound import nets, oracle, reach
from wfsound.generators import gen_family
from wfsound.nets import Net, reverse_net

from util import diamond, pump_net, random_workflow, random_marking

H = Fraction(1, 2)
Q = Fraction(1, 4)


def test_max_fireable_set_examples():
    net = diamond()
    full, levels = reach.max_fireable_set(net, {"i"}, set(net.transitions))
    assert full == {"s", "t1", "t2", "u"}
    assert levels["s"] == 0 and levels["u"] == 2
    empty, _ = reach.max_fireable_set(net, set(), set(net.transitions))
    assert empty == set()
    late, _ = reach.max_fireable_set(net, {"q1", "q2"}, set(net.transitions))
    assert late == {"u"}


def test_max_fireable_set_monotone():
    rng = random.Random(3)
    for _ in range(40):
        net = random_workflow(rng)
        marked = set(random_marking(rng, net.places))
        cands = {t for t in net.transitions if rng.random() < 0.7}
        small, _ = reach.max_fireable_set(net, marked, cands)
        grown, _ = reach.max_fireable_set(net, marked | {"f"}, set(net.transitions))
        assert small <= grown


def test_decide_creach_fractional_target():
    net = diamond()
    ok, cert = reach.decide_creach(net, {"i": 1}, {"i": H, "p1": Q, "p2": H, "q1": Q})
    assert ok
    assert reach.verify_creach_certificate(
        net, {"i": 1}, {"i": H, "p1": Q, "p2": H, "q1": Q}, cert)


def test_decide_creach_reflexive():
    net = diamond()
    m = {"p1": Fraction(2, 3)}
    ok, cert = reach.decide_creach(net, m, m)
    assert ok and cert.parikh == {}


def test_decide_creach_rejects_nquasi():
    net = gen_family("nquasi", 3)
    ok, cert = reach.decide_creach(net, {"i": 1}, {"f": 1})
    assert not ok
    assert cert.fixpoint_support is not None


def test_certificate_tampering_detected():
    net = diamond()
    ok, cert = reach.decide_creach(net, {"i": 1}, {"f": 1})
    assert ok
    bad = replace(cert, parikh={**cert.parikh, "s": cert.parikh["s"] + 1})
    assert not reach.verify_creach_certificate(net, {"i": 1}, {"f": 1}, bad)
    empty = reach.CreachCertificate(True, {}, [], [])
    assert not reach.verify_creach_certificate(net, {"i": 1}, {"f": 1}, empty)


def test_creach_agrees_with_reversal():
    rng = random.Random(11)
    for _ in range(60):
        net = random_workflow(rng)
        m = random_marking(rng, net.places)
        m2 = random_marking(rng, net.places)
        fwd, _ = reach.decide_creach(net, m, m2)
        bwd, _ = reach.decide_creach(reverse_net(net), m2, m)
        assert fwd == bwd


def test_rescale_to_continuous_and_replay():
    net = diamond()
    run = ["s", "t1", "t2", "u"]
    cont = reach.rescale_run("to_continuous", run, 2)
    assert cont == [(H, "s"), (H, "t1"), (H, "t2"), (H, "u")]
    end = reach.replay_continuous(net, {"i": H}, cont)
    assert end == {"f": H}


def test_rescale_identity_and_to_discrete():
    assert reach.rescale_run("to_continuous", ["a"], 1) == [(1, "a")]
    run = [(H, "s"), (Q, "t1")]
    assert reach.rescale_run("to_discrete", run, 4) == ["s", "s", "t1"]
    net = diamond()
    assert reach.replay_discrete(net, {"i": 4}, ["s", "s", "t1"]) is not None
    with pytest.raises(ValueError):
        reach.rescale_run("to_discrete", [(Fraction(1, 3), "s")], 4)


def test_scaling_lemma_on_oracle_runs():
    # discrete runs at scale b certify continuous reachability at scale 1
    rng = random.Random(5)
    checked = 0
    while checked < 60:
        net = random_workflow(rng)
        b = rng.randint(1, 3)
        m = random_marking(rng, net.places, max_tokens=2)
        scaled = {p: b * v for p, v in m.items()}
        run = []
        cur = dict(scaled)
        for _ in range(rng.randint(1, 5)):
            options = [t for t in net.transitions if nets.enabled(net, cur, t)]
            if not options:
                break
            t = rng.choice(options)
            cur = nets.fire(net, cur, t)
            run.append(t)
        if not run:
            continue
        target = {p: Fraction(v, b) for p, v in cur.items()}
        ok, _ = reach.decide_creach(net, m, target)
        assert ok
        cont = reach.rescale_run("to_continuous", run, b)
        assert reach.replay_continuous(net, m, cont) == {
            p: Fraction(v) for p, v in target.items()}
        checked += 1


def test_integer_boundedness():
    assert reach.check_integer_boundedness(diamond()).bounded
    for c in (1, 3, 5):
        assert reach.check_integer_boundedness(gen_family("nc", c)).bounded
    res = reach.check_integer_boundedness(pump_net())
    assert res.unbounded
    assert res.witness.get("t_dup", 0) >= 1
    assert reach.verify_unboundedness_witness(pump_net(), res.witness)
    assert not reach.verify_unboundedness_witness(diamond(), {"s": 1})


def test_nonredundancy():
    net = diamond()
    for p in net.places:
        assert reach.is_nonredundant(net, p)


def _dead_producer_net() -> Net:
    # "waste" is fed only by t_dead, whose pre includes unmarkable "void"
    return Net(
        "deadprod",
        ["i", "p", "void", "waste", "f"],
        ["s", "t_dead", "t_use", "t_f"],
        {"s": {"i": 1}, "t_dead": {"p": 1, "void": 1}, "t_use": {"waste": 1},
         "t_f": {"p": 1}},
        {"s": {"p": 1}, "t_dead": {"waste": 1, "void": 1}, "t_use": {"f": 1},
         "t_f": {"f": 1}},
        "i", "f",
    )


def test_nonredundancy_dead_producer():
    net = _dead_producer_net()
    assert not reach.is_nonredundant(net, "waste")
    assert not reach.is_nonredundant(net, "void")
    assert reach.is_nonredundant(net, "p")
    # cross-check against explicit exploration
    graph = oracle.explore(net, {"i": 1}, cap=1000)
    marked = {p for node in graph.nodes for p, v in node if v}
    for p in net.places:
        assert reach.is_nonredundant(net, p) == (p in marked)


def test_remove_redundant_places():
    net = diamond()
    reduced, removed = reach.remove_redundant_places(net)
    assert removed == [] and reduced is net

    dead = _dead_producer_net()
    reduced, removed = reach.remove_redundant_places(dead)
    assert set(removed) == {"void", "waste"}
    assert set(reduced.transitions) == {"s", "t_f"}
    again, removed2 = reach.remove_redundant_places(reduced)
    assert removed2 == []
    # identical reachable sets from one initial token
    before = {n for n in oracle.explore(dead, {"i": 1}, 1000).nodes}
    after = {n for n in oracle.explore(reduced, {"i": 1}, 1000).nodes}
    assert before == after

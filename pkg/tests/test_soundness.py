import random
from fractions import Fraction

import pytest

from wfsound import reach, soundness
from wfsound.generators import gen_dnf_net, gen_family, parse_dnf
from wfsound.soundness import (
    KBounds, check_continuous_soundness, compute_k_q, compute_k_z,
    coverable_places_smt, decide_creach_smt,
)

from util import diamond, pump_net, random_workflow, random_marking


def test_decide_creach_smt_examples():
    net = diamond()
    assert decide_creach_smt(net, {"i": 1}, {"f": 1})
    half = {p: Fraction(1, 2) for p in ("i", "q1")}
    assert decide_creach_smt(net, half, half)
    assert not decide_creach_smt(gen_family("nquasi", 3), {"i": 1}, {"f": 1})


def test_decide_creach_smt_agrees_with_fixpoint():
    rng = random.Random(7)
    for _ in range(60):
        net = random_workflow(rng)
        m = random_marking(rng, net.places)
        m2 = random_marking(rng, net.places)
        expected, _ = reach.decide_creach(net, m, m2)
        assert decide_creach_smt(net, m, m2) == expected


def test_coverable_places_agreement():
    rng = random.Random(13)
    for _ in range(15):
        net = random_workflow(rng)
        assert coverable_places_smt(net) == reach.coverable_places(net)


def test_continuous_soundness_sound_nets():
    res = check_continuous_soundness(diamond())
    assert res.sound
    res = check_continuous_soundness(gen_dnf_net(parse_dnf("x1 | !x1")))
    assert res.sound


def test_continuous_soundness_family_witness():
    net = gen_family("nc", 3)
    res = check_continuous_soundness(net)
    assert not res.sound
    fwd, _ = reach.decide_creach(net, {"i": 1}, res.witness)
    assert fwd
    back, _ = reach.decide_creach(net, res.witness, {"f": 1})
    assert not back


def test_continuous_soundness_nontautology():
    res = check_continuous_soundness(gen_dnf_net(parse_dnf("x1 & x2")))
    assert not res.sound


def test_continuous_soundness_unbounded_net():
    # integer-unbounded nets with no redundant places are continuously
    # unsound as well
    res = check_continuous_soundness(pump_net())
    assert not res.sound


def test_continuous_soundness_timeout():
    with pytest.raises(TimeoutError):
        check_continuous_soundness(diamond(), timeout=1e-9)


def test_k_bounds_goldens():
    assert compute_k_z(diamond(), cap=8) == 1
    assert compute_k_q(diamond(), cap=8) == 1
    s4 = gen_family("sound", 4)
    assert compute_k_z(s4, cap=8) == 4
    assert compute_k_q(s4, cap=8) == 4
    assert compute_k_z(gen_family("nquasi", 3), cap=16) is None
    ns5 = gen_family("nsound", 5)
    assert compute_k_q(ns5, cap=8) == 5


def test_k_bounds_chain():
    rng = random.Random(29)
    for _ in range(10):
        net = random_workflow(rng)
        k_z = compute_k_z(net, cap=6)
        k_q = compute_k_q(net, cap=6)
        assert KBounds(k_z, k_q, 6).chain_ok()
        if k_q is not None:
            # an integral-amount continuous run satisfies the integer
            # state equation, so k_q is a candidate for k_z
            assert k_z is not None and k_z <= k_q


def test_support_region_is_exact():
    # the projected region must contain exactly the markings whose
    # state equation to one exit token is solvable positively on the
    # support
    net = diamond()
    support = frozenset(net.transitions)
    rows = soundness._support_region(net, support)
    inside = {"i": Fraction(1)}
    outside = {"q1": Fraction(1)}
    for m, expect in ((inside, True), (outside, False)):
        sat = all(
            (sum(c * m.get(k[1], 0) for k, c in coeffs.items()) < rhs
             if rel == soundness.LT else
             sum(c * m.get(k[1], 0) for k, c in coeffs.items()) <= rhs)
            for coeffs, rel, rhs in rows)
        assert sat == expect

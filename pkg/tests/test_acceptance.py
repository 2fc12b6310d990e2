"""Acceptance gate: one test per top-level requirement.

Each test prints a single PASS line on success; Unsound verdicts
produced anywhere in this module are pooled and re-audited by the final
test. Scales here are the contractual ones, so this module is slower
than the unit suites.
"""

import random
import time
from fractions import Fraction

import pytest

from wfsound import nets, oracle, reach
from wfsound.generators import (
    chain, expand_weights, gen_dnf_net, gen_family, gen_random_dnf,
)
from wfsound.nets import Net, is_free_choice, is_place_invariant
from wfsound.pipelines import (
    analyze_free_choice, analyze_generalised, analyze_structural,
    verify_verdict,
)
from wfsound.reductions import RULES, apply_rule
from wfsound.soundness import check_continuous_soundness, decide_creach_smt

from util import diamond, random_marking, random_workflow

UNSOUND_POOL = []   # (net, verdict) pairs audited by the final test


def _record(net: Net, verdict) -> None:
    if verdict.outcome == "Unsound":
        UNSOUND_POOL.append((net, verdict))


def _passed(line: str) -> None:
    print(f"PASS: {line}")


def test_weighted_family_golden_verdicts_and_refutation():
    # exact threshold behaviour at desk scale
    for c in range(1, 7):
        net = gen_family("nc", c)
        for k in range(1, c):
            assert oracle.oracle_k_sound(net, k, cap=10 ** 6)[0], (c, k)
        assert not oracle.oracle_k_sound(net, c, cap=10 ** 6)[0], c
    # the semi-decision refutes every instance well under the bound
    for c in range(1, 41):
        net = gen_family("nc", c)
        start = time.monotonic()
        verdict = analyze_generalised(net)
        elapsed = time.monotonic() - start
        assert verdict.outcome == "Unsound", c
        assert elapsed < 30.0, (c, elapsed)
        _record(net, verdict)
    _passed("weighted family matches the k-soundness oracle for c<=6 and "
            "is refuted by the pipeline for all c<=40 in under 30s each")


def test_structural_pipeline_family_suite():
    for c in range(2, 41):
        net = gen_family("nquasi", c)
        verdict = analyze_structural(net)
        assert verdict.outcome == "Unsound", c
        assert verdict.certificate["kind"] == "not-quasi-sound", c
        _record(net, verdict)
    for c in range(2, 11):
        verdict = analyze_structural(gen_family("sound", c))
        assert verdict.outcome == "Sound", c
        assert verdict.certificate == {"kind": "k-sound", "k": c}
        assert verdict.k_bounds["k_n"] == c
        assert verdict.k_bounds["k_q"] == verdict.k_bounds["k_n"], c
    for c in range(2, 11):
        net = gen_family("nsound", c)
        verdict = analyze_structural(net)
        assert verdict.outcome == "Unsound", c
        assert verdict.certificate["kind"] == "k-unsound"
        assert verdict.certificate["k"] == c
        assert verdict.k_bounds["k_n"] == c
        assert verdict.k_bounds["k_q"] == verdict.k_bounds["k_n"], c
        _record(net, verdict)
    # constant-size instances stay trivial at extreme parameters
    start = time.monotonic()
    verdict = analyze_structural(gen_family("nquasi", 10 ** 6))
    elapsed = time.monotonic() - start
    assert verdict.outcome == "Unsound" and elapsed < 10.0, elapsed
    _passed("structural pipeline classifies all three families at "
            "contract scales; relaxation bound equals the explicit "
            "bound throughout; parameter 10^6 decided in "
            f"{elapsed:.2f}s")


def test_continuous_soundness_equals_dnf_tautology():
    rng = random.Random(20260823)
    tautologies = 0
    for i in range(200):
        m = rng.randint(1, 4)
        k = rng.randint(1, 4)
        formula = gen_random_dnf(m, k, seed=1000 + i)
        expected = oracle.dnf_tautology(formula)
        tautologies += expected
        result = check_continuous_soundness(gen_dnf_net(formula))
        assert result.sound == expected, (i, formula)
    assert tautologies and tautologies < 200
    _passed("continuous soundness of the encoding net coincides with "
            f"propositional tautology on 200 random formulas "
            f"({tautologies} tautologies), zero mismatches")


def test_reachability_decision_agrees_with_smt_encoding():
    rng = random.Random(4217)
    reachable = 0
    for i in range(500):
        net = random_workflow(rng, extra_places=4, n_transitions=6,
                              max_weight=2)
        m = random_marking(rng, net.places, max_tokens=3)
        m2 = random_marking(rng, net.places, max_tokens=3)
        direct, _cert = reach.decide_creach(net, m, m2)
        encoded = decide_creach_smt(net, m, m2)
        assert direct == encoded, (i, m, m2)
        reachable += direct
    assert 0 < reachable < 500
    _passed("fixpoint decision and logical encoding agree on 500 random "
            f"reachability queries ({reachable} reachable)")


def test_run_rescaling_round_trips():
    rng = random.Random(9035)
    done = 0
    attempts = 0
    while done < 200:
        attempts += 1
        assert attempts < 5000
        net = random_workflow(rng, extra_places=3, n_transitions=4)
        b = rng.randint(1, 3)
        m = random_marking(rng, net.places, max_tokens=2)
        scaled = {p: b * v for p, v in m.items()}
        run = []
        cur = nets.marking(scaled)
        for _ in range(rng.randint(1, 8)):
            enabled = [t for t in net.transitions
                       if nets.enabled(net, cur, t)]
            if not enabled:
                break
            t = rng.choice(enabled)
            run.append(t)
            cur = nets.fire(net, cur, t)
        if not run:
            continue
        cont = reach.rescale_run("to_continuous", run, b)
        final = reach.replay_continuous(net, m, cont)
        assert final is not None, (m, run, b)
        assert final == {p: Fraction(v, b) for p, v in cur.items() if v}
        ok, _cert = reach.decide_creach(net, m, final)
        assert ok, (m, final)
        assert reach.rescale_run("to_discrete", cont, b) == run
        done += 1
    _passed("200 random discrete runs rescale to replay-valid "
            "continuous runs, are confirmed reachable, and round-trip "
            "back to the original run")


def test_reduction_rules_preserve_relaxation_verdicts():
    rng = random.Random(5571)
    applications = 0
    attempts = 0
    while applications < 200:
        attempts += 1
        assert attempts < 5000
        extra = rng.randint(2, 4)
        net = random_workflow(rng, extra_places=extra,
                              n_transitions=rng.randint(extra + 1, extra + 3))
        for rule in rng.sample(RULES, len(RULES)):
            result = apply_rule(net, rule)
            if result is None:
                continue
            reduced, _step = result
            applications += 1
            assert (reach.check_integer_boundedness(reduced).bounded
                    == reach.check_integer_boundedness(net).bounded), rule
            assert (check_continuous_soundness(reduced).sound
                    == check_continuous_soundness(net).sound), rule
    _passed("200 reduction-rule applications on random nets leave the "
            "integer-boundedness and continuous-soundness verdicts "
            "unchanged")


def test_free_choice_decision_matches_oracle_and_scales():
    rng = random.Random(1406)
    toy = gen_family("sound", 1)
    instances = [diamond(), toy, chain([diamond(), toy, diamond()])]
    for n in range(2, 12):
        parts = [rng.choice((diamond(), toy)) for _ in range(n)]
        instances.append(chain(parts))
    while len(instances) < 110:
        extra = rng.randint(1, 3)
        net = random_workflow(rng, extra_places=extra,
                              n_transitions=rng.randint(extra + 1, extra + 3))
        if not is_free_choice(net):
            continue
        # only instances the oracle can explore completely qualify
        if not oracle.explore(net, {net.initial_place: 1},
                              cap=10 ** 5).complete:
            continue
        instances.append(net)
    sound_count = 0
    for net in instances:
        expected = oracle.oracle_k_sound(net, 1, cap=10 ** 6)[0]
        verdict = analyze_free_choice(net)
        assert (verdict.outcome == "Sound") == expected, net.name
        sound_count += expected
        _record(net, verdict)
    assert 0 < sound_count < len(instances)

    timings = {}
    for n in (100, 200, 400):
        net = chain([toy] * n)
        start = time.monotonic()
        verdict = analyze_free_choice(net)
        timings[n] = time.monotonic() - start
        assert verdict.outcome == "Sound", n
    # at most quadratic growth, with slack for timing noise
    base = max(timings[100], 0.05)
    assert timings[400] <= 4 * (400 / 100) ** 2 * base, timings
    _passed(f"free-choice decision equals the exploration oracle on "
            f"{len(instances)} instances ({sound_count} sound); chains "
            f"up to 400 components decided Sound with at most "
            f"quadratic growth ({timings[100]:.2f}s -> "
            f"{timings[400]:.2f}s)")


def _soundness_profile(net: Net, k: int, cap: int):
    """(k-sound, k-quasi-sound) from one complete exploration."""
    graph = oracle.explore(net, {net.initial_place: k}, cap)
    if not graph.complete:
        raise oracle.CapExceeded(cap)
    goal_idx = graph.index.get(nets.canon({net.final_place: k}))
    if goal_idx is None:
        return False, False
    good = oracle._backward_closure(graph, [goal_idx])
    return len(good) == len(graph.nodes), True


def test_weight_expansion_preserves_soundness_profile():
    checked = 0
    for family, lo in (("nc", 1), ("sound", 1), ("nquasi", 2),
                       ("nsound", 1)):
        for c in range(lo, 4):
            net = gen_family(family, c)
            wide = expand_weights(net)
            for k in range(1, 7):
                narrow = _soundness_profile(net, k, cap=10 ** 6)
                expanded = _soundness_profile(wide, k, cap=4 * 10 ** 6)
                assert narrow == expanded, (family, c, k)
                checked += 1
    # token climbs to every counter level and back, and the binary
    # conservation law holds on both gadget orientations
    for b in range(2, 9):
        holder = Net("holder", ["src", "p", "z"], ["t0", "t"],
                     {"t0": {"src": 1}, "t": {"p": b}},
                     {"t0": {"p": 1}, "t": {"z": 1}},
                     "src", "z")
        wide = expand_weights(holder)
        g = "t__p__in"
        n = b.bit_length()
        for i in range(1, n + 1):
            start = {"p": 2 ** (i - 1)}
            up = oracle.explore(wide, start, cap=10 ** 5)
            assert nets.canon({f"{g}_r{i}": 1}) in up.index, (b, i)
            down = oracle.explore(wide, {f"{g}_r{i}": 1}, cap=10 ** 5)
            assert nets.canon(start) in down.index, (b, i)
        inv = {"p": 1}
        for i in range(1, n):
            inv[f"{g}_l{i}"] = 2 ** (i - 1)
        for i in range(1, n + 1):
            inv[f"{g}_r{i}"] = 2 ** (i - 1)
        gadget_ts = [t for t in wide.transitions if t.startswith(g)]
        assert is_place_invariant(wide, inv, gadget_ts), b

        emitter = Net("emitter", ["z", "p"], ["t"],
                      {"t": {"z": 1}}, {"t": {"p": b}}, "z", "p")
        wide = expand_weights(emitter)
        g = "t__p__out"
        for i in range(1, n + 1):
            down = oracle.explore(wide, {f"{g}_d{i}": 1}, cap=10 ** 5)
            assert nets.canon({"p": 2 ** (i - 1)}) in down.index, (b, i)
        inv = {"p": 1}
        for i in range(1, n + 1):
            inv[f"{g}_d{i}"] = 2 ** (i - 1)
        for i in range(1, n):
            inv[f"{g}_h{i}"] = 2 ** (i - 1)
        gadget_ts = [t for t in wide.transitions if t.startswith(g)]
        assert is_place_invariant(wide, inv, gadget_ts), b
    _passed(f"weight expansion preserves the k-(quasi-)soundness "
            f"profile over {checked} oracle comparisons (k<=6, c<=3); "
            f"counter-level reachability and conservation laws hold "
            f"for weights up to 8")


def test_every_unsound_verdict_passes_audit():
    assert len(UNSOUND_POOL) >= 80
    for net, verdict in UNSOUND_POOL:
        assert verify_verdict(net, verdict), (net.name,
                                              verdict.certificate)
    _passed(f"all {len(UNSOUND_POOL)} Unsound verdicts produced above "
            f"carry certificates that re-verify from scratch")

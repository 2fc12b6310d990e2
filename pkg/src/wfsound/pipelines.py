"""Verdict composition.

Three analyses over validated workflow nets: the generalised-soundness
semi-decision (necessary conditions, conclusive on free-choice nets),
the structural-soundness procedure (relaxation bounds plus explicit
confirmation), and the exact free-choice decision. Every Unsound
verdict carries a certificate that verify_verdict re-checks from
scratch.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import oracle, reach
from .nets import Net, NetError, is_free_choice, validate_workflow
from .reductions import reduce_fixpoint
from .smt.driver import SolverError
from .soundness import check_continuous_soundness, compute_k_q, compute_k_z

DEFAULT_CAP_K = 64
DEFAULT_EXPLORE_CAP = 10**6

PROPERTIES = ("gen-sound", "struct-sound", "cont-sound", "int-bounded",
              "quasi-sound", "k-sound")


@dataclass
class Verdict:
    property: str
    outcome: str                      # "Sound" | "Unsound" | "Unknown"
    certificate: dict | None = None
    k_bounds: dict | None = None
    stage_timings_ms: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "property": self.property,
            "outcome": self.outcome,
            "certificate": _jsonable(self.certificate),
            "k_bounds": self.k_bounds,
            "stage_timings_ms": self.stage_timings_ms,
        }, indent=2, sort_keys=True) + "\n"


def _jsonable(value):
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = list(value)
        if isinstance(value, (set, frozenset)):
            items = sorted(items, key=str)
        return [_jsonable(v) for v in items]
    return value


class _Stages:
    def __init__(self):
        self.timings = {}

    def run(self, name, fn, *args, **kwargs):
        start = time.monotonic()
        try:
            return fn(*args, **kwargs)
        finally:
            self.timings[name] = round(
                (time.monotonic() - start) * 1000, 3)


def _require_workflow(net: Net) -> None:
    problems = validate_workflow(net)
    if problems:
        raise NetError("not a workflow net: " + "; ".join(problems))


def analyze_generalised(net: Net, reduce: bool = False, solver=None,
                        timeout=None, dump_dir=None) -> Verdict:
    """Semi-decide soundness for every initial token count at once.

    Integer unboundedness or continuous unsoundness each refute; a
    continuously sound free-choice net is sound outright; otherwise the
    result is an honest Unknown.
    """
    _require_workflow(net)
    stages = _Stages()
    deadline = None if timeout is None else time.monotonic() + timeout

    def remaining():
        if deadline is None:
            return None
        left = deadline - time.monotonic()
        if left <= 0:
            raise TimeoutError("analysis deadline exceeded")
        return left

    net, _removed = stages.run("redundant-places",
                               reach.remove_redundant_places, net)
    if reduce and net.has_unit_weights():
        net, _trace = stages.run("reduce", reduce_fixpoint, net)

    bound = stages.run("int-bounded", reach.check_integer_boundedness, net)
    if bound.unbounded:
        return Verdict("gen-sound", "Unsound",
                       certificate={"kind": "unbounded-parikh",
                                    "parikh": dict(bound.witness)},
                       stage_timings_ms=stages.timings)

    try:
        cont = stages.run("cont-sound", check_continuous_soundness, net,
                          solver=solver, timeout=remaining(),
                          dump_dir=dump_dir)
    except TimeoutError:
        return Verdict("gen-sound", "Unknown",
                       certificate={"kind": "timeout"},
                       stage_timings_ms=stages.timings)
    if not cont.sound:
        return Verdict("gen-sound", "Unsound",
                       certificate={"kind": "stuck-marking",
                                    "marking": dict(cont.witness)},
                       stage_timings_ms=stages.timings)
    if stages.run("free-choice", is_free_choice, net):
        return Verdict("gen-sound", "Sound",
                       certificate={"kind": "free-choice-continuous"},
                       stage_timings_ms=stages.timings)
    return Verdict(
        "gen-sound", "Unknown",
        certificate={"kind": "inconclusive",
                     "detail": "continuously sound; generalised soundness "
                               "not refuted"},
        stage_timings_ms=stages.timings)


def analyze_structural(net: Net, cap_k: int = DEFAULT_CAP_K,
                       explore_cap: int = DEFAULT_EXPLORE_CAP,
                       solver=None, timeout=None, dump_dir=None) -> Verdict:
    """Decide whether some initial token count makes the net sound.

    Quasi-soundness for some k is equivalent to a continuous run from
    one entry token to one exit token, so a stage-1 rejection is exact.
    Otherwise the relaxation bounds seed an explicit search for the
    least quasi-sound k, which is then checked for full k-soundness.
    """
    _require_workflow(net)
    stages = _Stages()
    ok, cert = stages.run("quasi-reach", reach.decide_creach,
                          net, {net.initial_place: 1}, {net.final_place: 1})
    if not ok:
        return Verdict(
            "struct-sound", "Unsound",
            certificate={"kind": "not-quasi-sound",
                         "fixpoint_support": cert.fixpoint_support},
            stage_timings_ms=stages.timings)

    k_z = stages.run("k-z", compute_k_z, net, cap_k,
                     solver=solver, timeout=timeout, dump_dir=dump_dir)
    k_q = stages.run("k-q", compute_k_q, net, cap_k,
                     solver=solver, timeout=timeout, dump_dir=dump_dir)
    bounds = {"k_z": k_z, "k_q": k_q, "cap": cap_k}
    if k_q is None:
        return Verdict("struct-sound", "Unknown",
                       certificate={"kind": "cap-exceeded"},
                       k_bounds=bounds, stage_timings_ms=stages.timings)

    # the least quasi-sound k is at least k_q; quasi-soundness is not
    # monotone in k, so candidates are scanned in order
    k_n = None
    try:
        start = time.monotonic()
        for k in range(k_q, cap_k + 1):
            if oracle.oracle_k_quasi_sound(net, k, cap=explore_cap):
                k_n = k
                break
        stages.timings["k-n-scan"] = round(
            (time.monotonic() - start) * 1000, 3)
        if k_n is None:
            return Verdict("struct-sound", "Unknown",
                           certificate={"kind": "cap-exceeded"},
                           k_bounds=bounds, stage_timings_ms=stages.timings)
        bounds["k_n"] = k_n
        sound, counterexample = stages.run(
            "k-sound", oracle.oracle_k_sound, net, k_n, cap=explore_cap)
    except oracle.CapExceeded:
        return Verdict("struct-sound", "Unknown",
                       certificate={"kind": "explore-cap-exceeded"},
                       k_bounds=bounds, stage_timings_ms=stages.timings)
    if sound:
        return Verdict("struct-sound", "Sound",
                       certificate={"kind": "k-sound", "k": k_n},
                       k_bounds=bounds, stage_timings_ms=stages.timings)
    return Verdict("struct-sound", "Unsound",
                   certificate={"kind": "k-unsound", "k": k_n,
                                "counterexample": dict(counterexample)},
                   k_bounds=bounds, stage_timings_ms=stages.timings)


def analyze_free_choice(net: Net, solver=None, timeout=None,
                        explore_cap: int = DEFAULT_EXPLORE_CAP) -> Verdict:
    """Exact decision on free-choice nets, where 1-, generalised,
    structural, and continuous soundness all coincide.

    Reduction rules preserve continuous soundness, so the relaxation
    check runs on the reduced net (long sequential compositions
    collapse to a few nodes). An Unsound answer is re-certified on the
    original net: continuous unsoundness implies 1-unsoundness here, so
    explicit exploration yields an auditable counterexample.
    """
    _require_workflow(net)
    if not is_free_choice(net):
        raise NetError("net is not free-choice")
    stages = _Stages()
    checked = net
    if net.has_unit_weights():
        checked, _trace = stages.run("reduce", reduce_fixpoint, net)
    cont = stages.run("cont-sound", check_continuous_soundness, checked,
                      solver=solver, timeout=timeout)
    if cont.sound:
        return Verdict("gen-sound", "Sound",
                       certificate={"kind": "free-choice-continuous"},
                       stage_timings_ms=stages.timings)
    try:
        sound, counterexample = stages.run(
            "certify", oracle.oracle_k_sound, net, 1, cap=explore_cap)
    except oracle.CapExceeded:
        sound = True
    if not sound:
        return Verdict("gen-sound", "Unsound",
                       certificate={"kind": "k-unsound", "k": 1,
                                    "counterexample": dict(counterexample)},
                       stage_timings_ms=stages.timings)
    # exploration could not confirm the reduced-net refutation; fall
    # back to a witness on the original net
    cont = stages.run("cont-sound-full", check_continuous_soundness, net,
                      solver=solver, timeout=timeout)
    if cont.sound:
        raise SolverError(
            "reduction changed the continuous-soundness verdict")
    return Verdict("gen-sound", "Unsound",
                   certificate={"kind": "stuck-marking",
                                "marking": dict(cont.witness)},
                   stage_timings_ms=stages.timings)


def analyze_property(net: Net, prop: str, k: int = 1, **kwargs) -> Verdict:
    """Dispatch by property name (the CLI surface)."""
    if prop == "gen-sound":
        return analyze_generalised(net, **kwargs)
    if prop == "struct-sound":
        return analyze_structural(net, **kwargs)
    if prop == "cont-sound":
        _require_workflow(net)
        stages = _Stages()
        cont = stages.run("cont-sound", check_continuous_soundness, net,
                          **kwargs)
        if cont.sound:
            return Verdict("cont-sound", "Sound",
                           stage_timings_ms=stages.timings)
        return Verdict("cont-sound", "Unsound",
                       certificate={"kind": "stuck-marking",
                                    "marking": dict(cont.witness)},
                       stage_timings_ms=stages.timings)
    if prop == "int-bounded":
        stages = _Stages()
        res = stages.run("int-bounded", reach.check_integer_boundedness, net)
        if res.bounded:
            return Verdict("int-bounded", "Sound",
                           stage_timings_ms=stages.timings)
        return Verdict("int-bounded", "Unsound",
                       certificate={"kind": "unbounded-parikh",
                                    "parikh": dict(res.witness)},
                       stage_timings_ms=stages.timings)
    if prop == "quasi-sound":
        _require_workflow(net)
        stages = _Stages()
        try:
            result = stages.run("quasi-sound", oracle.oracle_k_quasi_sound,
                                net, k)
        except oracle.CapExceeded:
            return Verdict("quasi-sound", "Unknown",
                           certificate={"kind": "explore-cap-exceeded"},
                           stage_timings_ms=stages.timings)
        return Verdict("quasi-sound", "Sound" if result else "Unsound",
                       certificate=None if result else
                       {"kind": "k-not-quasi-sound", "k": k},
                       stage_timings_ms=stages.timings)
    if prop == "k-sound":
        _require_workflow(net)
        stages = _Stages()
        try:
            sound, counterexample = stages.run(
                "k-sound", oracle.oracle_k_sound, net, k)
        except oracle.CapExceeded:
            return Verdict("k-sound", "Unknown",
                           certificate={"kind": "explore-cap-exceeded"},
                           stage_timings_ms=stages.timings)
        if sound:
            return Verdict("k-sound", "Sound",
                           certificate={"kind": "k-sound", "k": k},
                           stage_timings_ms=stages.timings)
        return Verdict("k-sound", "Unsound",
                       certificate={"kind": "k-unsound", "k": k,
                                    "counterexample": dict(counterexample)},
                       stage_timings_ms=stages.timings)
    raise NetError(f"unknown property {prop!r}")


# ---------------------------------------------------------------------------
# Certificate audit

def verify_verdict(net: Net, verdict: Verdict) -> bool:
    """Re-validate a verdict's certificate from scratch.

    Only verdicts carrying a checkable certificate can pass; Unsound
    without one is always rejected.
    """
    cert = verdict.certificate
    if verdict.outcome == "Unknown":
        return True
    if cert is None:
        return verdict.outcome == "Sound"
    kind = cert.get("kind")
    if kind == "stuck-marking":
        witness = {p: Fraction(v) for p, v in cert["marking"].items()}
        fwd, _ = reach.decide_creach(net, {net.initial_place: 1}, witness)
        back, _ = reach.decide_creach(net, witness,
                                      {net.final_place: 1})
        return fwd and not back
    if kind == "unbounded-parikh":
        return reach.verify_unboundedness_witness(net, cert["parikh"])
    if kind == "not-quasi-sound":
        ok, _ = reach.decide_creach(net, {net.initial_place: 1},
                                    {net.final_place: 1})
        return not ok
    if kind == "k-unsound":
        sound, _ = oracle.oracle_k_sound(net, cert["k"])
        return not sound
    if kind == "k-not-quasi-sound":
        return not oracle.oracle_k_quasi_sound(net, cert["k"])
    if kind == "k-sound":
        sound, _ = oracle.oracle_k_sound(net, cert["k"])
        return sound
    if kind == "free-choice-continuous":
        return (is_free_choice(net)
                and check_continuous_soundness(net).sound)
    return False

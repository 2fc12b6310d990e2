"""Shared helpers for the test suite."""

from __future__ import annotations

import random

from wfsound.nets import Net, validate_workflow


def diamond() -> Net:
    """Sound free-choice net: a split into two parallel branches that
    rejoin before the exit place."""
    return Net(
        "diamond",
        ["i", "p1", "p2", "q1", "q2", "f"],
        ["s", "t1", "t2", "u"],
        {"s": {"i": 1}, "t1": {"p1": 1}, "t2": {"p2": 1},
         "u": {"q1": 1, "q2": 1}},
        {"s": {"p1": 1, "p2": 1}, "t1": {"q1": 1}, "t2": {"q2": 1},
         "u": {"f": 1}},
        "i", "f",
    )


def shared_pre_net() -> Net:
    """Not free-choice: two transitions share a pre place with
    different pre vectors."""
    return Net(
        "sharedpre",
        ["i", "p", "q", "f"],
        ["s", "a", "b"],
        {"s": {"i": 1}, "a": {"p": 1}, "b": {"p": 1, "q": 1}},
        {"s": {"p": 1, "q": 1}, "a": {"f": 1}, "b": {"f": 1}},
        "i", "f",
    )


def pump_net() -> Net:
    """Valid workflow net containing a token-pumping transition."""
    return Net(
        "pump",
        ["i", "p", "q", "f"],
        ["s", "t_dup", "t_q", "t_f"],
        {"s": {"i": 1}, "t_dup": {"p": 1}, "t_q": {"q": 1}, "t_f": {"p": 1}},
        {"s": {"p": 1}, "t_dup": {"p": 1, "q": 1}, "t_q": {"f": 1}, "t_f": {"f": 1}},
        "i", "f",
    )


def random_workflow(rng: random.Random, extra_places=3, n_transitions=4,
                    max_weight=1, max_tries=500) -> Net:
    """Rejection-sample a valid workflow net of roughly the given size."""
    for _ in range(max_tries):
        places = ["i"] + [f"p{k}" for k in range(extra_places)] + ["f"]
        inner = places[:-1]   # no consumption from f
        targets = places[1:]  # no production into i
        transitions = [f"t{k}" for k in range(n_transitions)]
        pre, post = {}, {}
        for t in transitions:
            ins = rng.sample(inner, rng.randint(1, min(2, len(inner))))
            outs = rng.sample(targets, rng.randint(1, min(2, len(targets))))
            pre[t] = {p: rng.randint(1, max_weight) for p in ins}
            post[t] = {p: rng.randint(1, max_weight) for p in outs}
        net = Net("rand", places, transitions, pre, post, "i", "f")
        if not validate_workflow(net):
            return net
    raise RuntimeError("could not sample a valid workflow net")


def random_marking(rng: random.Random, places, max_tokens=3, density=0.5):
    return {p: rng.randint(1, max_tokens) for p in places if rng.random() < density}

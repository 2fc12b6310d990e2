"""Benchmark harness.

Each instance is analyzed in its own child process under a wall-clock
timeout; overruns are killed and recorded as timed-out Unknown rows.
Rows are flushed to the CSV as they complete, so an interrupted run
leaves partial results behind.
"""

from __future__ import annotations

import csv
import multiprocessing as mp
import time
from dataclasses import dataclass

from . import nets
from .generators import chain, gen_dnf_net, gen_family, gen_random_dnf
from .pipelines import analyze_property

CSV_HEADER = ("instance", "family", "param", "places", "transitions",
              "property", "outcome", "time_ms", "timeout")

SUITES = ("gen-families", "struct-families", "dnf", "chains")

DEFAULT_TIMEOUT = 120.0


@dataclass
class Instance:
    instance: str
    family: str
    param: int
    net_json: str
    property: str


def suite_instances(suite: str, max_c: int | None = None) -> list:
    if suite == "gen-families":
        top = max_c or 8
        return [
            Instance(f"nc-{c}", "nc", c, nets.dumps_json(gen_family("nc", c)),
                     "gen-sound")
            for c in range(1, top + 1)
        ]
    if suite == "struct-families":
        top = max_c or 8
        out = []
        for family in ("nquasi", "sound", "nsound"):
            for c in range(2, top + 1):
                out.append(Instance(
                    f"{family}-{c}", family, c,
                    nets.dumps_json(gen_family(family, c)), "struct-sound"))
        return out
    if suite == "dnf":
        count = max_c or 20
        out = []
        for seed in range(count):
            formula = gen_random_dnf(4, 4, seed)
            out.append(Instance(
                f"dnf-{seed}", "dnf", seed,
                nets.dumps_json(gen_dnf_net(formula)), "cont-sound"))
        return out
    if suite == "chains":
        top = max_c or 40
        lengths = [n for n in (5, 10, 20, 40, 100, 200, 400) if n <= top]
        toy = gen_family("sound", 1)
        return [
            Instance(f"chain-{n}", "chain", n,
                     nets.dumps_json(chain([toy] * n)), "gen-sound")
            for n in lengths
        ]
    raise ValueError(f"unknown suite {suite!r}")


def _child(net_json: str, prop: str, timeout: float, conn) -> None:
    net = nets.loads_json(net_json)
    kwargs = {"timeout": timeout} if prop in (
        "gen-sound", "struct-sound", "cont-sound") else {}
    try:
        verdict = analyze_property(net, prop, **kwargs)
        conn.send(verdict.outcome)
    except TimeoutError:
        conn.send("Unknown")
    except Exception:
        conn.send("Unknown")
    finally:
        conn.close()


def run_bench_suite(suite: str, out_csv, timeout: float = DEFAULT_TIMEOUT,
                    workers: int = 1, max_c: int | None = None) -> list:
    """Run every instance of a suite and stream rows to the CSV."""
    todo = list(suite_instances(suite, max_c))
    rows = []
    running = []   # (proc, conn, inst, start)
    ctx = mp.get_context("fork")

    with open(out_csv, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        handle.flush()

        def finish(inst, outcome, elapsed, timed_out):
            net = nets.loads_json(inst.net_json)
            row = (inst.instance, inst.family, inst.param,
                   len(net.places), len(net.transitions), inst.property,
                   outcome, round(elapsed * 1000, 3),
                   "1" if timed_out else "0")
            rows.append(row)
            writer.writerow(row)
            handle.flush()

        while todo or running:
            while todo and len(running) < max(1, workers):
                inst = todo.pop(0)
                parent, child = ctx.Pipe(duplex=False)
                proc = ctx.Process(target=_child,
                                   args=(inst.net_json, inst.property,
                                         timeout, child))
                proc.start()
                child.close()
                running.append((proc, parent, inst, time.monotonic()))
            time.sleep(0.01)
            still = []
            for proc, conn, inst, start in running:
                elapsed = time.monotonic() - start
                if not proc.is_alive():
                    outcome = conn.recv() if conn.poll() else "Unknown"
                    proc.join()
                    conn.close()
                    finish(inst, outcome, elapsed, False)
                elif elapsed > timeout:
                    proc.terminate()
                    proc.join()
                    conn.close()
                    finish(inst, "Unknown", elapsed, True)
                else:
                    still.append((proc, conn, inst, start))
            running = still
    return rows

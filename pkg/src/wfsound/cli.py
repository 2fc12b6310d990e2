"""Command-line front end.

Exit codes: 0 = Sound, 1 = Unsound, 2 = Unknown or timeout, 64 = usage
error, 65 = input error, 70 = solver error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import bench, generators, nets, reductions
from .nets import NetError
from .pipelines import PROPERTIES, Verdict, analyze_property
from .smt.driver import SolverError

EXIT_SOUND = 0
EXIT_UNSOUND = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64
EXIT_INPUT = 65
EXIT_SOLVER = 70

_OUTCOME_CODES = {"Sound": EXIT_SOUND, "Unsound": EXIT_UNSOUND,
                  "Unknown": EXIT_UNKNOWN}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wfsound",
                     description="Workflow-net soundness toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="analyze a workflow net")
    analyze.add_argument("net", help="net file (JSON or PNML)")
    analyze.add_argument("--property", required=True, choices=PROPERTIES)
    analyze.add_argument("--k", type=int, default=1,
                         help="token count for quasi-sound / k-sound")
    analyze.add_argument("--reduce", action="store_true",
                         help="apply reduction rules first (unit weights)")
    analyze.add_argument("--solver", default=None,
                         help="solver binary (default: bundled)")
    analyze.add_argument("--dump-smt", default=None, metavar="DIR",
                         help="dump emitted solver scripts for audit")
    analyze.add_argument("--timeout", type=float, default=None,
                         metavar="SECS")
    analyze.add_argument("--format", choices=("json", "text"),
                         default="text")

    generate = sub.add_parser("generate", help="generate a net family")
    generate.add_argument("--family", required=True,
                          choices=("nc", "sound", "nquasi", "nsound",
                                   "dnf", "chain"))
    generate.add_argument("--c", type=int, default=None,
                          help="family parameter")
    generate.add_argument("--dnf", default=None, metavar="FORMULA",
                          help="clauses '|'-separated, literals '&', "
                               "negation '!', variables x1..xm")
    generate.add_argument("--inputs", nargs="*", default=None,
                          metavar="FILE", help="nets to chain")
    generate.add_argument("--expand-weights", action="store_true")
    generate.add_argument("-o", "--output", required=True)

    reduce = sub.add_parser("reduce", help="apply reduction rules")
    reduce.add_argument("net")
    reduce.add_argument("-o", "--output", required=True)
    reduce.add_argument("--trace", default=None, metavar="TRACE.json")

    expand = sub.add_parser("expand", help="expand arc weights away")
    expand.add_argument("net")
    expand.add_argument("-o", "--output", required=True)

    bench_p = sub.add_parser("bench", help="run a benchmark suite")
    bench_p.add_argument("--suite", required=True, choices=bench.SUITES)
    bench_p.add_argument("--max-c", type=int, default=None)
    bench_p.add_argument("--workers", type=int, default=1)
    bench_p.add_argument("--timeout", type=float, default=120.0)
    bench_p.add_argument("--out", required=True, metavar="CSV")
    return parser


def _load_net(path: str):
    try:
        return nets.load(path)
    except (OSError, NetError) as exc:
        print(f"wfsound: cannot load net: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _cmd_analyze(args) -> int:
    net = _load_net(args.net)
    kwargs = {}
    if args.property in ("gen-sound", "struct-sound", "cont-sound"):
        kwargs.update(solver=args.solver, timeout=args.timeout,
                      dump_dir=args.dump_smt)
    if args.property == "gen-sound":
        kwargs["reduce"] = args.reduce
    try:
        verdict = analyze_property(net, args.property, k=args.k, **kwargs)
    except TimeoutError:
        verdict = Verdict(args.property, "Unknown",
                          certificate={"kind": "timeout"})
    except NetError as exc:
        print(f"wfsound: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"wfsound: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if args.format == "json":
        sys.stdout.write(verdict.to_json())
    else:
        summary = verdict.outcome
        if verdict.certificate:
            summary += "  " + json.dumps(
                json.loads(json.dumps(verdict.certificate, default=str)),
                sort_keys=True)
        print(summary)
    return _OUTCOME_CODES[verdict.outcome]


def _cmd_generate(args) -> int:
    try:
        if args.family == "dnf":
            if args.dnf is None:
                print("wfsound: --dnf is required for the dnf family",
                      file=sys.stderr)
                return EXIT_USAGE
            net = generators.gen_dnf_net(generators.parse_dnf(args.dnf))
        elif args.family == "chain":
            if not args.inputs:
                print("wfsound: --inputs is required for the chain family",
                      file=sys.stderr)
                return EXIT_USAGE
            net = generators.chain([_load_net(p) for p in args.inputs])
        else:
            if args.c is None:
                print("wfsound: --c is required for this family",
                      file=sys.stderr)
                return EXIT_USAGE
            net = generators.gen_family(args.family, args.c)
        if args.expand_weights:
            net = generators.expand_weights(net)
    except NetError as exc:
        print(f"wfsound: {exc}", file=sys.stderr)
        return EXIT_INPUT
    nets.save(net, args.output)
    return EXIT_SOUND


def _cmd_reduce(args) -> int:
    net = _load_net(args.net)
    try:
        reduced, trace = reductions.reduce_fixpoint(net)
    except NetError as exc:
        print(f"wfsound: {exc}", file=sys.stderr)
        return EXIT_INPUT
    nets.save(reduced, args.output)
    if args.trace:
        steps = [{"rule": s.rule, "removed_places": s.removed_places,
                  "removed_transitions": s.removed_transitions,
                  "merged": s.merged} for s in trace.steps]
        with open(args.trace, "w") as handle:
            json.dump(steps, handle, indent=2)
            handle.write("\n")
    return EXIT_SOUND


def _cmd_expand(args) -> int:
    net = _load_net(args.net)
    nets.save(generators.expand_weights(net), args.output)
    return EXIT_SOUND


def _cmd_bench(args) -> int:
    try:
        bench.run_bench_suite(args.suite, args.out, timeout=args.timeout,
                              workers=args.workers, max_c=args.max_c)
    except (OSError, NetError) as exc:
        print(f"wfsound: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_SOUND


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "analyze": _cmd_analyze,
        "generate": _cmd_generate,
        "reduce": _cmd_reduce,
        "expand": _cmd_expand,
        "bench": _cmd_bench,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    raise SystemExit(main())

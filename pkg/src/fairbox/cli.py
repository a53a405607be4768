"""Command-line frontend.

  fairbox verify FILE [flags]          exit 0 fair, 1 unfair, 2 unknown, 3 error
  fairbox check-certificate CERT FILE  exit 0 accepted, 1 rejected, 3 error

`verify` prints a JSON report (schema shipped as report_schema_v1.json) to
stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .dsl import ParseError, ValidationFailure, parse_source, validate
from .fairness import (
    INF,
    NothingToCertify,
    certificate_from_json,
    certificate_to_json,
    check_fairness,
    emit_certificate,
    verify_certificate,
)
from .mc import mc_estimate
from .symexec import EVENTS, PathExplosion, dump_paths, enumerate_paths
from .volume import (
    DEFAULT_GAP_TARGET,
    DEFAULT_MAX_SPLITS,
    DEFAULT_TRUNCATION_SIGMAS,
    RefinementBudget,
)

EXIT_FAIR = 0
EXIT_UNFAIR = 1
EXIT_UNKNOWN = 2
EXIT_ERROR = 3

_VERDICT_EXIT = {"fair": EXIT_FAIR, "unfair": EXIT_UNFAIR, "unknown": EXIT_UNKNOWN}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairbox",
        description="group-fairness verification with certified probability bounds",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="verify a model+program+spec file")
    v.add_argument("file", help="input file (model, program, spec block)")
    v.add_argument("--epsilon", type=float, default=None,
                   help="override the file's epsilon (default: use the file)")
    v.add_argument("--budget", type=int, default=DEFAULT_MAX_SPLITS,
                   help="max splits per event region (default %(default)s)")
    v.add_argument("--gap", type=float, default=DEFAULT_GAP_TARGET,
                   help="per-event gap target (default %(default)s)")
    v.add_argument("--truncation-sigmas", type=float,
                   default=DEFAULT_TRUNCATION_SIGMAS, metavar="K",
                   help="root box half-width in sigmas (default %(default)s)")
    v.add_argument("--mc-check", type=int, default=None, metavar="N",
                   help="append a Monte Carlo cross-check with N samples")
    v.add_argument("--seed", type=int, default=42,
                   help="Monte Carlo seed (default %(default)s)")
    v.add_argument("--emit-certificate", metavar="PATH", default=None,
                   help="write a certificate JSON on decided verdicts")
    v.add_argument("--dump-paths", action="store_true",
                   help="dump enumerated paths to stderr")
    v.add_argument("--workers", type=int, default=1,
                   help="parallel workers for refinement/sampling (default 1)")
    v.add_argument("--engine", choices=("auto", "compiled", "python"),
                   default="auto", help="refinement engine (default auto)")
    fmt = v.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="as_json", action="store_true",
                     default=True, help="JSON report on stdout (default)")
    fmt.add_argument("--human", dest="as_json", action="store_false",
                     help="human-readable table instead of JSON")

    c = sub.add_parser("check-certificate",
                       help="re-verify a certificate against its source file")
    c.add_argument("certificate", help="certificate JSON path")
    c.add_argument("source", help="original input file")
    return parser


def _ext(x: float):
    return "inf" if x == INF else x


def _report(verdict, args, timings, mc_section) -> dict:
    report = {
        "tool": "fairbox",
        "tool_version": __version__,
        "schema_version": 1,
        "verdict": verdict.outcome,
        "epsilon": verdict.epsilon,
        "ratio": {"lower": _ext(verdict.ratio.lower),
                  "upper": _ext(verdict.ratio.upper)},
        "probabilities": {
            name: {
                "lower": b.lower,
                "upper": b.upper,
                "mixed_mass": b.mixed_mass,
                "tail_mass": b.tail_mass,
                "splits_used": b.splits_used,
            }
            for name, b in verdict.probabilities.items()
        },
        "budget": {
            "rounds": verdict.budget["rounds"],
            "decided": verdict.budget["decided"],
            "max_splits": verdict.budget["max_splits"],
            "gap_target": verdict.budget["gap_target"],
            "splits": verdict.budget["splits"],
            "paths": verdict.budget["paths"],
        },
        "config": {
            "epsilon": verdict.epsilon,
            "truncation_sigmas": verdict.budget["truncation_sigmas"],
            "max_splits": verdict.budget["max_splits"],
            "gap_target": verdict.budget["gap_target"],
            "seed": args.seed,
            "workers": args.workers,
            "engine": verdict.budget["engine"],
        },
        "timings": timings,
    }
    if mc_section is not None:
        report["mc"] = mc_section
    return report


def _human_lines(report: dict) -> list[str]:
    lines = [
        f"verdict   : {report['verdict']}   (epsilon = {report['epsilon']})",
        f"ratio     : [{report['ratio']['lower']}, {report['ratio']['upper']}]",
        "event probabilities:",
    ]
    for name, b in report["probabilities"].items():
        lines.append(
            f"  {name:28} [{b['lower']:.6f}, {b['upper']:.6f}]"
            f"  splits={b['splits_used']}")
    bud = report["budget"]
    lines.append(
        f"budget    : {bud['rounds']} rounds, decided={bud['decided']}, "
        f"paths={bud['paths']}")
    lines.append(f"timings   : {report['timings']}")
    if "mc" in report:
        mc = report["mc"]
        lines.append(
            f"mc        : n={mc['samples']} seed={mc['seed']} "
            f"gen={mc['generator']} ratio~{mc['ratio_estimate']} "
            f"consistent={mc['consistent']}")
    return lines


def cmd_verify(args) -> int:
    timings: dict[str, float] = {}
    t_start = time.perf_counter()
    try:
        with open(args.file, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        print(f"fairbox: cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    t0 = time.perf_counter()
    try:
        task = parse_source(source)
        vtask = validate(task)
    except ParseError as exc:
        print(f"fairbox: syntax error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValidationFailure as exc:
        for diag in exc.diagnostics:
            print(f"fairbox: {diag}", file=sys.stderr)
        return EXIT_ERROR
    timings["parse_s"] = time.perf_counter() - t0
    for diag in vtask.warnings:
        print(f"fairbox: {diag}", file=sys.stderr)
    if args.epsilon is not None and not 0.0 < args.epsilon < 1.0:
        print(f"fairbox: --epsilon must lie strictly between 0 and 1, "
              f"got {args.epsilon}", file=sys.stderr)
        return EXIT_ERROR

    engine = None if args.engine == "auto" else args.engine
    try:
        if args.dump_paths:
            for line in dump_paths(vtask, enumerate_paths(vtask)):
                print(line, file=sys.stderr)
        verdict = check_fairness(
            vtask,
            RefinementBudget(args.budget, args.gap),
            epsilon=args.epsilon,
            truncation_sigmas=args.truncation_sigmas,
            engine=engine,
            workers=args.workers,
        )
    except PathExplosion as exc:
        print(f"fairbox: {exc}", file=sys.stderr)
        return EXIT_ERROR
    timings["analyze_s"] = verdict.budget["analyze_s"]
    timings["refine_s"] = verdict.budget["refine_s"]

    mc_section = None
    if args.mc_check is not None:
        t0 = time.perf_counter()
        est = mc_estimate(vtask, args.mc_check, args.seed, workers=args.workers)
        timings["mc_s"] = time.perf_counter() - t0
        consistent = True
        for name in EVENTS:
            b = verdict.probabilities[name]
            e = est.events[name]
            spread = 3.0 * (e.stderr or 0.0)
            if not (b.lower - spread <= e.estimate <= b.upper + spread):
                consistent = False
        mc_section = {
            "samples": est.samples,
            "seed": est.seed,
            "generator": est.generator,
            "events": {
                name: {"estimate": e.estimate, "stderr": e.stderr,
                       "count": e.count}
                for name, e in est.events.items()
            },
            "ratio_estimate": est.ratio,
            "consistent": consistent,
        }

    if args.emit_certificate:
        try:
            cert = emit_certificate(verdict, source)
        except NothingToCertify:
            print("fairbox: verdict is unknown; no certificate emitted",
                  file=sys.stderr)
        else:
            with open(args.emit_certificate, "w", encoding="utf-8") as fh:
                fh.write(certificate_to_json(cert))
                fh.write("\n")

    timings["total_s"] = time.perf_counter() - t_start
    report = _report(verdict, args, timings, mc_section)
    if args.as_json:
        json.dump(report, sys.stdout, indent=1, sort_keys=True)
        print()
    else:
        print("\n".join(_human_lines(report)))
    return _VERDICT_EXIT[verdict.outcome]


def cmd_check_certificate(args) -> int:
    try:
        with open(args.certificate, encoding="utf-8") as fh:
            cert_text = fh.read()
        with open(args.source, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        print(f"fairbox: cannot read input: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        cert = certificate_from_json(cert_text)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"fairbox: malformed certificate: {exc}", file=sys.stderr)
        return EXIT_ERROR
    result = verify_certificate(cert, source)
    if result.accepted:
        print("certificate accepted")
        return 0
    print(f"certificate rejected: {result.reason}", file=sys.stderr)
    return 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args)
    return cmd_check_certificate(args)


if __name__ == "__main__":
    sys.exit(main())

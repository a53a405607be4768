#!/usr/bin/env python3
"""Benchmark the compiled refinement core against the pure-Python fallback.

Usage: python benchmarks/bench_engines.py [--splits N] [--repeat K]
"""

import argparse
import pathlib
import statistics
import sys
import time

from fairbox.dsl import parse_source, validate
from fairbox.engine import HAVE_COMPILED
from fairbox.symexec import build_event_region, enumerate_paths
from fairbox.volume import RefinementBudget, bound_volume, mixture_measure

FIXTURES = pathlib.Path(__file__).parent.parent / "tests" / "fixtures"

WORKLOADS = [
    ("case study, hire&minority", "casestudy.fg", "qualified_and_sensitive"),
    ("case study, hire&rest", "casestudy.fg", "qualified_and_not_sensitive"),
    ("bernoulli mixture", "bernoulli.fg", "qualified_and_sensitive"),
    ("disjunctive guards", "disjunctive.fg", "qualified_and_sensitive"),
]


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--splits", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    engines = ["python"] + (["compiled"] if HAVE_COMPILED else [])
    if not HAVE_COMPILED:
        print("note: compiled engine not built; benchmarking fallback only")

    print(f"{'workload':<28} {'engine':<9} {'median':>9} {'splits/s':>11}  bounds")
    for label, fixture, event in WORKLOADS:
        vt = validate(parse_source((FIXTURES / fixture).read_text()))
        paths = enumerate_paths(vt)
        region = build_event_region(paths, event, vt)
        measure = mixture_measure(vt, region)
        base = None
        for engine in engines:
            times = []
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                b = bound_volume(region, measure,
                                 RefinementBudget(args.splits, 0.0),
                                 engine=engine, collect_boxes=False)
                times.append(time.perf_counter() - t0)
            med = statistics.median(times)
            rate = b.splits_used / med
            extra = ""
            if engine == "python":
                base = med
            elif base is not None:
                extra = f"  ({base / med:.1f}x vs python)"
            print(f"{label:<28} {engine:<9} {med:>8.3f}s {rate:>10.0f}"
                  f"  [{b.lower:.6f}, {b.upper:.6f}]{extra}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

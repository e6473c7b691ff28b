"""Command-line entry point.

Exit status: 0 success, 1 usage error, 2 data or config error, 3 numerical
failure (including a bench row that fails).
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

from .. import analysis
from ..errors import ConfigError, DataError, TractionError
from ..soil import PROTOTYPE_SHAPE
from . import pipeline
from .config import load_estimator_config, load_scenario
from .io import ESTIMATE_COLUMNS, read_csv, write_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("tractionid")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default; usage errors here are 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text, count, what):
    try:
        values = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{what}: expected {count} comma-separated numbers, got {text!r}") from None
    if len(values) != count:
        raise UsageError(f"{what}: expected {count} comma-separated numbers, got {text!r}")
    return values


def cmd_simulate(args):
    from .simulate import simulate
    write_csv(args.out, simulate(load_scenario(args.scenario)))
    return EXIT_OK


def cmd_estimate(args):
    from .replay import replay
    config = load_estimator_config(args.config) if args.config else None
    result = replay(read_csv(args.log), config, source=args.log)
    table = result.table
    extra = [n for n in table.names if n not in ESTIMATE_COLUMNS]
    write_csv(args.out, table, ESTIMATE_COLUMNS + extra)
    if result.skipped:
        print(f"{args.log}: skipped {result.skipped} of {result.total} records", file=sys.stderr)
    if result.failed:
        print(f"{args.log}: more than 1% of records failed; run marked failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_fit(args):
    shape = _floats(args.shape, 3, "--shape") if args.shape else PROTOTYPE_SHAPE
    width, s_min, s_max = _floats(args.bins, 3, "--bins")
    if width <= 0:
        raise UsageError("--bins: width must be positive")
    if s_min >= s_max:
        raise UsageError("--bins: min must be smaller than max")
    try:
        wheels = tuple(int(w) for w in args.wheels.split(","))
    except ValueError:
        raise UsageError(f"--wheels: expected wheel numbers, got {args.wheels!r}") from None
    if any(w not in pipeline.WHEELS for w in wheels):
        raise UsageError("--wheels: wheel numbers are 1 to 4")
    table = read_csv(args.estimates)
    s, mu = pipeline.pooled_slip_adhesion(table, args.t_min, wheels, source=args.estimates)
    fit, bins, fit_table = pipeline.fit_curve(s, mu, shape, width, s_min, s_max, args.weighted)
    write_csv(args.out, fit_table, pipeline.FIT_COLUMNS)
    if args.bins_out:
        write_csv(args.bins_out, bins, pipeline.BIN_COLUMNS)
    print(f"a={fit.a:.6g} nrmse={fit.nrmse:.4g} r2={fit.r2:.4g} bins={fit.n_bins}")
    return EXIT_OK


def cmd_sections(args):
    scenario = load_scenario(args.scenario)
    table = read_csv(args.estimates)
    _, _, out = pipeline.section_report(table, scenario, args.wheel, source=args.estimates)
    write_csv(args.out, out, pipeline.SECTION_COLUMNS)
    return EXIT_OK


def cmd_detect(args):
    if args.window < 2:
        raise UsageError("--window must be at least 2")
    if not args.threshold > 0:
        raise UsageError("--threshold must be positive")
    table = read_csv(args.estimates)
    events = pipeline.detect_events(table, args.window, args.threshold, source=args.estimates)
    write_csv(args.out, pipeline.events_table(events), pipeline.EVENT_COLUMNS)
    print(f"{len(events)} change event(s)")
    return EXIT_OK


def cmd_bench(args):
    from .bench import format_row, run_bench
    start = time.perf_counter()
    rows = run_bench(args.out, report=lambda row: print(format_row(row), flush=True))
    passed = sum(r.passed for r in rows)
    print(f"{passed}/{len(rows)} criteria passed in {time.perf_counter() - start:.1f} s; "
          f"outputs in {args.out}")
    return EXIT_OK if passed == len(rows) else EXIT_NUMERIC


def build_parser():
    parser = _Parser(prog="tractionid", description="Traction estimation tools.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log skipped records")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run a scenario and write a sensor log")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="replay a sensor log through the estimator")
    p.add_argument("--log", required=True)
    p.add_argument("--config", help="estimator config (defaults when omitted)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("fit", help="bin estimates and fit the curve scale")
    p.add_argument("--estimates", required=True)
    p.add_argument("--shape", help="p,alpha1,alpha2 (default: prototype shape)")
    p.add_argument("--bins", default=f"{analysis.DEFAULT_BIN_WIDTH},{analysis.DEFAULT_S_MIN},"
                                     f"{analysis.DEFAULT_S_MAX}", help="width,min,max")
    p.add_argument("--t-min", type=float, default=0.0, help="ignore samples before this time")
    p.add_argument("--wheels", default="1,2,3,4", help="wheels to pool, e.g. 4 or 1,2,3,4")
    p.add_argument("--weighted", action="store_true", help="weight bins by sample count")
    p.add_argument("--bins-out", help="also write the bin table here")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sections", help="per-soil section statistics")
    p.add_argument("--estimates", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--wheel", type=int, choices=pipeline.WHEELS, default=pipeline.INSTRUMENTED_WHEEL)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sections)

    p = sub.add_parser("detect", help="ground-change events from estimates")
    p.add_argument("--estimates", required=True)
    p.add_argument("--window", type=int, default=analysis.DEFAULT_DETECT_WINDOW)
    p.add_argument("--threshold", type=float, default=analysis.DEFAULT_DETECT_THRESHOLD)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("bench", help="run the built-in acceptance scenarios")
    p.add_argument("--out", default="bench_out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tractionid {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, DataError) as exc:
        print(f"tractionid {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TractionError as exc:
        print(f"tractionid {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

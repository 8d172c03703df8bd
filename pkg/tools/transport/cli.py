"""Command-line driver: run, verify-bounds, ratio-table, bench and generate.

Exit codes: 0 pass, 1 bound violation or an algorithm breaking its own contract, 2 usage or parse
error, 3 unknown algorithm.
"""

import argparse
import csv
import datetime
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence, TextIO

from .algorithms import (
    ALGORITHM_NAMES,
    CapacityException,
    SiteLabelException,
    UnknownAlgorithmException,
    make_algorithm,
)
from .decomposition import DecompositionException
from .hybrid import CavityInvariantException, HybridSpecException
from .instance import (
    CAPACITY_SCHEMES,
    KINDS,
    REQUEST_POSITIONS,
    SHAPES,
    GeneratorConfig,
    InstanceFormatException,
    generate,
    load_instance,
    serialize_instance,
)
from .metric import MetricValidationException, format_exact
from .online import AssignmentException, NoFreeSiteException, run_online
from .oracle import (
    CostModelException,
    MatchingException,
    SearchGuardException,
    ZeroOptimumException,
    opt_cost,
)
from .sweeps import (
    BENCH_COLUMNS,
    FAMILIES,
    RATIO_TABLE_COLUMNS,
    RATIO_TABLE_FAMILIES,
    SweepOptions,
    bench,
    ratio_table,
    verify_bounds,
)

log = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_UNKNOWN_ALGORITHM = 3

LOG_LEVEL_ENV = "OTR_LOG_LEVEL"
LOG_LEVELS = ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG")

USAGE_ERRORS = (
    CapacityException,
    InstanceFormatException,
    MetricValidationException,
    DecompositionException,
    SearchGuardException,
    CostModelException,
    HybridSpecException,
    SiteLabelException,
    MatchingException,
    NoFreeSiteException,
)

# an algorithm broke its own contract or a checked property failed outright
VIOLATION_ERRORS = (AssignmentException, ZeroOptimumException, CavityInvariantException)


class UsageException(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Raises instead of exiting so main() owns every exit code."""

    def error(self, message: str) -> None:
        raise UsageException(message)


def _comma_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _int_list(value: str) -> List[int]:
    try:
        return [int(item) for item in _comma_list(value)]
    except ValueError:
        raise argparse.ArgumentTypeError(
            "Expected comma-separated integers, got {!r}".format(value)
        )


def _add_no_timestamp(parser: argparse.ArgumentParser, default: Any) -> None:
    parser.add_argument(
        "--no-timestamp",
        action="store_true",
        default=default,
        help="Leave timestamps out of logs and reports so output is byte-deterministic",
    )


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="Seed of every random choice")
    parser.add_argument(
        "--workers", type=int, default=1, help="Worker processes for exhaustive searches"
    )
    parser.add_argument(
        "--unsafe-large",
        action="store_true",
        help="Lift the size guards on exhaustive searches",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="otr_harness", description="Online transportation algorithms and their bounds"
    )
    # accepted before or after the command name
    _add_no_timestamp(parser, False)
    subparsers = parser.add_subparsers(dest="command", help="command help")

    run_parser = subparsers.add_parser("run", help="Run one algorithm on one instance file")
    run_parser.add_argument("--instance", type=str, default=None, help="Instance JSON file")
    run_parser.add_argument(
        "--alg", type=str, required=True, help="One of: {}".format(", ".join(ALGORITHM_NAMES))
    )
    _add_no_timestamp(run_parser, argparse.SUPPRESS)
    run_parser.set_defaults(func=cmd_run)

    verify_parser = subparsers.add_parser(
        "verify-bounds", help="Run an acceptance sweep and write its CSV and JSON reports"
    )
    verify_parser.add_argument("--family", choices=FAMILIES, required=True, help="Sweep family")
    verify_parser.add_argument("--max-n", type=int, default=None, help="Largest tree size")
    verify_parser.add_argument("--max-k", type=int, default=None, help="Longest sequence")
    verify_parser.add_argument(
        "--samples", type=int, default=None, help="Seeded cases of the randomized families"
    )
    verify_parser.add_argument("--out", type=str, default="reports", help="Report directory")
    _add_common(verify_parser)
    _add_no_timestamp(verify_parser, argparse.SUPPRESS)
    verify_parser.set_defaults(func=cmd_verify_bounds)

    table_parser = subparsers.add_parser(
        "ratio-table", help="Empirical worst and mean ratios per algorithm and size"
    )
    table_parser.add_argument(
        "--alg",
        type=_comma_list,
        default=["sd", "greedy"],
        help="Comma-separated algorithms",
    )
    table_parser.add_argument(
        "--family",
        type=_comma_list,
        default=["doubling-path"],
        help="Comma-separated families out of: {}".format(", ".join(RATIO_TABLE_FAMILIES)),
    )
    table_parser.add_argument("--max-m", type=int, default=4, help="Largest number of sites")
    table_parser.add_argument(
        "--samples", type=int, default=5, help="Seeded instances per randomized family and size"
    )
    table_parser.add_argument("--out", type=str, default=None, help="CSV file, stdout if unset")
    _add_common(table_parser)
    _add_no_timestamp(table_parser, argparse.SUPPRESS)
    table_parser.set_defaults(func=cmd_ratio_table)

    bench_parser = subparsers.add_parser("bench", help="Time SD runs on uniform paths")
    bench_parser.add_argument(
        "--n-list", type=_int_list, default=[1000, 2000, 4000], help="Comma-separated path sizes"
    )
    bench_parser.add_argument("--repeats", type=int, default=5, help="Timed runs per size")
    bench_parser.add_argument(
        "--requests",
        type=int,
        default=None,
        help="Time only this many raw selections per run instead of the whole run",
    )
    bench_parser.add_argument("--out", type=str, default=None, help="CSV file, stdout if unset")
    _add_no_timestamp(bench_parser, argparse.SUPPRESS)
    bench_parser.set_defaults(func=cmd_bench)

    generate_parser = subparsers.add_parser("generate", help="Write a seeded instance as JSON")
    generate_parser.add_argument("--shape", choices=SHAPES, default="random-tree", help="Geometry")
    generate_parser.add_argument("--n", type=int, default=4, help="Number of points")
    generate_parser.add_argument("--m", type=int, default=None, help="Number of sites")
    generate_parser.add_argument("--k", type=int, default=None, help="Number of requests")
    generate_parser.add_argument("--lo", type=int, default=0, help="Smallest weight exponent")
    generate_parser.add_argument("--hi", type=int, default=2, help="Largest weight exponent")
    generate_parser.add_argument(
        "--capacity-scheme", choices=CAPACITY_SCHEMES, default="unit", help="Site capacities"
    )
    generate_parser.add_argument("--kind", choices=KINDS, default=None, help="Instance kind")
    generate_parser.add_argument(
        "--request-positions", choices=REQUEST_POSITIONS, default=None, help="Request support"
    )
    generate_parser.add_argument("--seed", type=int, default=0, help="Generator seed")
    generate_parser.add_argument("--out", type=str, default=None, help="JSON file, stdout if unset")
    _add_no_timestamp(generate_parser, argparse.SUPPRESS)
    generate_parser.set_defaults(func=cmd_generate)
    return parser


def cmd_run(args: argparse.Namespace) -> int:
    if args.alg not in ALGORITHM_NAMES:
        raise UnknownAlgorithmException(
            "Unknown algorithm {!r}, expected one of: {}".format(
                args.alg, ", ".join(ALGORITHM_NAMES)
            )
        )
    if not args.instance:
        raise UsageException("run needs --instance")
    instance = load_instance(args.instance)
    alg = make_algorithm(args.alg, instance)
    trace = run_online(instance, alg)
    print("t,request,site,cost")
    for step in trace.steps:
        print("{},{},{},{}".format(step.t, step.request, step.site, format_exact(step.cost)))
    print("total_cost {}".format(format_exact(trace.total_cost)))
    print("opt_cost {}".format(format_exact(opt_cost(instance))))
    return EXIT_PASS


def _timestamp(args: argparse.Namespace) -> Optional[str]:
    if args.no_timestamp:
        return None
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def cmd_verify_bounds(args: argparse.Namespace) -> int:
    options = SweepOptions(
        args.family,
        max_n=args.max_n,
        max_k=args.max_k,
        seed=args.seed,
        workers=args.workers,
        samples=args.samples,
        unsafe=args.unsafe_large,
    )
    report = verify_bounds(options, timestamp=_timestamp(args))
    csv_path, json_path = report.write(args.out)
    verdict = "PASS" if report.passed else "FAIL"
    print("{}: {} ({}, {})".format(args.family, verdict, csv_path, json_path))
    return EXIT_PASS if report.passed else EXIT_VIOLATION


def _write_table(
    rows: List[Dict[str, Any]], columns: Sequence[str], out: Optional[str]
) -> None:
    if out:
        directory = os.path.dirname(out)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(out, "w", newline="") as f:
            _dump_table(rows, columns, f)
        log.info("Wrote %d rows to %s", len(rows), out)
    else:
        _dump_table(rows, columns, sys.stdout)


def _dump_table(rows: List[Dict[str, Any]], columns: Sequence[str], f: TextIO) -> None:
    writer = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def cmd_ratio_table(args: argparse.Namespace) -> int:
    for name in args.alg:
        if name not in ALGORITHM_NAMES:
            raise UnknownAlgorithmException(
                "Unknown algorithm {!r}, expected one of: {}".format(
                    name, ", ".join(ALGORITHM_NAMES)
                )
            )
    rows = ratio_table(
        args.alg,
        args.family,
        args.max_m,
        seed=args.seed,
        samples=args.samples,
        workers=args.workers,
        unsafe=args.unsafe_large,
    )
    _write_table(rows, RATIO_TABLE_COLUMNS, args.out)
    return EXIT_PASS


def cmd_bench(args: argparse.Namespace) -> int:
    if any(n < 1 for n in args.n_list):
        raise UsageException("Path sizes must be >= 1, got {}".format(args.n_list))
    if args.repeats < 1 or (args.requests is not None and args.requests < 1):
        raise UsageException("--repeats and --requests must be >= 1")
    rows = bench(args.n_list, repeats=args.repeats, requests=args.requests)
    _write_table(rows, BENCH_COLUMNS, args.out)
    return EXIT_PASS


def cmd_generate(args: argparse.Namespace) -> int:
    config = GeneratorConfig(
        seed=args.seed,
        shape=args.shape,
        n=args.n,
        m=args.m,
        k=args.k,
        lo=args.lo,
        hi=args.hi,
        capacity_scheme=args.capacity_scheme,
        kind=args.kind,
        request_positions=args.request_positions,
    )
    text = serialize_instance(generate(config))
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
        log.info("Wrote instance to %s", args.out)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def _configure_logging(no_timestamp: bool) -> None:
    level = os.environ.get(LOG_LEVEL_ENV, "INFO").upper()
    if level not in LOG_LEVELS:
        raise UsageException(
            "{} must be one of {}, got {!r}".format(LOG_LEVEL_ENV, ", ".join(LOG_LEVELS), level)
        )
    if no_timestamp:
        log_format = "[%(name)s|%(levelname)s]: %(message)s"
    else:
        log_format = "[%(asctime)s|%(name)s|%(levelname)s]: %(message)s"
    logging.basicConfig(format=log_format, level=level, stream=sys.stderr)


def main(argv: Sequence[str]) -> int:
    try:
        args = build_parser().parse_args(argv[1:])
        _configure_logging(args.no_timestamp)
        if not getattr(args, "func", None):
            raise UsageException("Missing command")
        return args.func(args)
    except UsageException as e:
        log.error("Usage error: %s", e)
        return EXIT_USAGE
    except UnknownAlgorithmException as e:
        log.error("%s", e)
        return EXIT_UNKNOWN_ALGORITHM
    except USAGE_ERRORS as e:
        log.error("%s", e)
        return EXIT_USAGE
    except VIOLATION_ERRORS as e:
        log.error("Violation: %s", e)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main(sys.argv))

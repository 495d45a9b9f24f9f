"""Command-line interface.

Exit codes: 0 on success, 1 when a validation or fetch fails, 2 on usage or
configuration errors. Failed experiments inside ``run`` do not change the
exit code; they are recorded with status ERROR.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from tsadbench.benchmark.history import (
    detect_shifts, format_shifts, history_add, load_history, release_rankings, release_table)
from tsadbench.benchmark.records import read_records, write_records, write_timings
from tsadbench.benchmark.runner import run_benchmark
from tsadbench.benchmark.summary import (
    METRICS, format_leaderboard, leaderboard, parse_rank_table, spearman_matrix, summarize)
from tsadbench.core.specs import PrimitiveRegistry, load_pipeline_file, load_pipelines
from tsadbench.data.csvio import read_intervals_csv
from tsadbench.data.registry import DatasetRegistry, fetch_dataset
from tsadbench.data.synthetic import configs_from_document, write_dataset
from tsadbench.evaluation import METHODS, scores_from_counts, segment_counts
from tsadbench.exceptions import ConfigError, FetchFailed, TsadbenchError
from tsadbench.validation import passed, validate_pipeline

logger = logging.getLogger("tsadbench")

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
DEFAULT_BASELINE = "arima_like"


def _registry(path):
    if path:
        return DatasetRegistry.from_file(path)
    local = Path("datasets.json")
    return DatasetRegistry.from_file(local if local.exists() else None)


def _primitives(dirs):
    return PrimitiveRegistry.default(dirs or ())


def _resolve_pipelines(names, registry):
    bundled = load_pipelines(registry)
    if not names:
        return [p for p in bundled.values() if p.status == "verified"]
    pipelines = []
    for name in names:
        if name in bundled:
            pipelines.append(bundled[name])
        elif name.endswith(".json") and Path(name).is_file():
            pipelines.append(load_pipeline_file(name, registry))
        else:
            raise ConfigError(f"unknown pipeline {name!r}")
    return pipelines


def _fmt(value):
    return "" if value is None else f"{value:.6g}"


# -- subcommands --------------------------------------------------------------

def cmd_run(args):
    registry = _registry(args.registry)
    pipelines = _resolve_pipelines(args.pipelines, _primitives(args.primitives))
    datasets = args.datasets or registry.names()
    records = run_benchmark(pipelines, datasets, args.metrics, args.iterations, args.seed,
                            args.workers, registry, args.reproducible)
    write_records(records, args.output)
    if args.timings:
        write_timings(records, args.timings)
    errors = sum(r.status == "ERROR" for r in records)
    print(f"{len(records)} experiment(s), {errors} error(s); results in {args.output}")
    return EXIT_OK


def cmd_summarize(args):
    records = read_records(args.results)
    summary = summarize(records, args.metric)
    text = summary.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.leaderboard or args.baseline:
        rows = leaderboard(summary, args.baseline or DEFAULT_BASELINE)
        board = format_leaderboard(rows)
        if args.leaderboard:
            Path(args.leaderboard).write_text(board)
        else:
            sys.stdout.write(board)
    return EXIT_OK


def cmd_evaluate(args):
    detected = read_intervals_csv(args.detected)
    truth = read_intervals_csv(args.truth)
    counts = segment_counts(detected, truth, tuple(args.domain), args.method, args.step)
    scores = scores_from_counts(counts)
    print(f"tp={counts.tp} fp={counts.fp} fn={counts.fn} "
          f"tn={'' if counts.tn is None else counts.tn}")
    print(f"precision={_fmt(scores.precision)} recall={_fmt(scores.recall)} "
          f"f1={_fmt(scores.f1)}")
    return EXIT_OK


def cmd_history_add(args):
    table = release_table(read_records(args.results))
    path = history_add(args.dir, args.version, table)
    print(f"recorded release {args.version} in {path}")
    return EXIT_OK


def cmd_history_shifts(args):
    reports = detect_shifts(load_history(args.dir), args.metric)
    sys.stdout.write(format_shifts(reports))
    return EXIT_OK


def cmd_history_rho(args):
    if args.ranks:
        rankings = parse_rank_table(Path(args.ranks).read_text())
    else:
        history = load_history(args.dir)
        if len(history.versions) < 2:
            raise ConfigError(f"{args.dir} holds fewer than two releases")
        _, rankings = release_rankings(history, args.baseline, args.metric)
    names, matrix, mean = spearman_matrix(rankings)
    print(",".join(["run", *names]))
    for name, row in zip(names, matrix):
        print(",".join([name, *(f"{v:.6g}" for v in row)]))
    print(f"mean pairwise rho: {_fmt(mean)}")
    return EXIT_OK


def cmd_pipeline_validate(args):
    results = validate_pipeline(args.path, _primitives(args.primitives))
    for result in results:
        print(result)
    return EXIT_OK if passed(results) else EXIT_FAILED


def cmd_data_fetch(args):
    registry = _registry(args.registry)
    registry[args.dataset]
    try:
        paths = fetch_dataset(args.dataset, registry)
    except FetchFailed as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_FAILED
    print(f"{len(paths)} file(s) available for {args.dataset}")
    return EXIT_OK


def cmd_data_synth(args):
    try:
        document = json.loads(Path(args.config).read_text())
    except json.JSONDecodeError as error:
        raise ConfigError(f"{args.config}: invalid JSON: {error}") from None
    path = write_dataset(configs_from_document(document), args.out, args.name)
    print(f"wrote synthetic dataset {args.name!r}; registry at {path}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="tsadbench", description="Benchmark time-series anomaly detection pipelines.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run pipelines over datasets")
    run.add_argument("--pipelines", nargs="+", metavar="NAME",
                     help="pipeline names or JSON paths (default: all verified pipelines)")
    run.add_argument("--datasets", nargs="+", metavar="NAME",
                     help="dataset names (default: every registered dataset)")
    run.add_argument("--metrics", choices=METHODS, default="overlapping",
                     help="segment counting method (default: %(default)s)")
    run.add_argument("--iterations", type=int, default=5,
                     help="repetitions per experiment (default: %(default)s)")
    run.add_argument("--seed", type=int, default=0, help="global seed (default: %(default)s)")
    run.add_argument("--workers", type=int, default=1,
                     help="worker threads (default: %(default)s)")
    run.add_argument("--output", default="results.csv",
                     help="detailed results CSV (default: %(default)s)")
    run.add_argument("--timings", metavar="FILE", help="per-primitive timings CSV")
    run.add_argument("--reproducible", action="store_true",
                     help="zero the run id and all wall times for byte-stable output")
    run.add_argument("--registry", metavar="FILE",
                     help="dataset registry (default: ./datasets.json, else the bundled one)")
    run.add_argument("--primitives", nargs="+", metavar="DIR",
                     help="extra directories of primitive JSON files")
    run.set_defaults(handler=cmd_run)

    summ = commands.add_parser("summarize", help="median scores and leaderboard")
    summ.add_argument("results", help="detailed results CSV")
    summ.add_argument("--metric", choices=METRICS, default="f1",
                      help="score to summarize (default: %(default)s)")
    summ.add_argument("--baseline", help=f"leaderboard baseline (default: {DEFAULT_BASELINE})")
    summ.add_argument("--out", metavar="FILE", help="summary CSV (default: stdout)")
    summ.add_argument("--leaderboard", metavar="FILE", help="leaderboard CSV")
    summ.set_defaults(handler=cmd_summarize)

    ev = commands.add_parser("evaluate", help="score detected against true intervals")
    ev.add_argument("--detected", required=True, metavar="FILE", help="start,end CSV")
    ev.add_argument("--truth", required=True, metavar="FILE", help="start,end CSV")
    ev.add_argument("--method", choices=METHODS, default="overlapping",
                    help="counting method (default: %(default)s)")
    ev.add_argument("--domain", nargs=2, type=int, required=True, metavar=("T0", "T1"),
                    help="time domain; inclusive for overlapping, [T0, T1) for weighted")
    ev.add_argument("--step", type=int, default=1,
                    help="sampling step for weighted counting (default: %(default)s)")
    ev.set_defaults(handler=cmd_evaluate)

    history = commands.add_parser("history", help="results across releases")
    actions = history.add_subparsers(dest="action", required=True)
    add = actions.add_parser("add", help="record a release from a results CSV")
    add.add_argument("--dir", default="releases", help="release directory (default: %(default)s)")
    add.add_argument("--version", required=True, help="release version, MAJOR.MINOR.PATCH")
    add.add_argument("--results", required=True, metavar="FILE", help="detailed results CSV")
    add.set_defaults(handler=cmd_history_add)
    shifts = actions.add_parser("shifts", help="flag score shifts between releases")
    shifts.add_argument("--dir", default="releases",
                        help="release directory (default: %(default)s)")
    shifts.add_argument("--metric", choices=METRICS, default="f1",
                        help="score to compare (default: %(default)s)")
    shifts.set_defaults(handler=cmd_history_shifts)
    rho = actions.add_parser("rho", help="pairwise rank correlation of leaderboards")
    rho.add_argument("--dir", default="releases", help="release directory (default: %(default)s)")
    rho.add_argument("--baseline", default=DEFAULT_BASELINE,
                     help="leaderboard baseline (default: %(default)s)")
    rho.add_argument("--metric", choices=METRICS, default="f1",
                     help="score to rank by (default: %(default)s)")
    rho.add_argument("--ranks", metavar="FILE",
                     help="pipeline,run1,run2,... rank table to use instead of releases")
    rho.set_defaults(handler=cmd_history_rho)

    pipeline = commands.add_parser("pipeline", help="pipeline tools")
    pactions = pipeline.add_subparsers(dest="action", required=True)
    validate = pactions.add_parser("validate", help="schema, data-flow, execution and "
                                                    "determinism checks")
    validate.add_argument("path", help="pipeline JSON file")
    validate.add_argument("--primitives", nargs="+", metavar="DIR",
                          help="extra directories of primitive JSON files")
    validate.set_defaults(handler=cmd_pipeline_validate)

    data = commands.add_parser("data", help="dataset tools")
    dactions = data.add_subparsers(dest="action", required=True)
    fetch = dactions.add_parser("fetch", help="download a dataset into the cache")
    fetch.add_argument("dataset", help="registered dataset name")
    fetch.add_argument("--registry", metavar="FILE",
                       help="dataset registry (default: ./datasets.json, else the bundled one)")
    fetch.set_defaults(handler=cmd_data_fetch)
    synth = dactions.add_parser("synth", help="write a synthetic dataset")
    synth.add_argument("--config", required=True, metavar="FILE",
                       help="JSON with a 'signals' list or a 'suite' object")
    synth.add_argument("--out", required=True, metavar="DIR", help="output directory")
    synth.add_argument("--name", default="synthetic", help="dataset name (default: %(default)s)")
    synth.set_defaults(handler=cmd_data_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except (TsadbenchError, OSError, ValueError, KeyError) as error:
        message = error.args[0] if isinstance(error, KeyError) and error.args else error
        print(f"error: {message}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Benchmark results per release, and detection of score shifts between releases.

A history is a directory of ``<X.Y.Z>.csv`` files with the columns
``pipeline,dataset,metric,value``. Metrics are the summary scores plus
``elapsed``, the mean wall time per experiment.
"""
from __future__ import annotations

import csv
import io
import os
import re
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tsadbench.benchmark.summary import (
    FAILED, METRICS, SUMMARY_HEADER, SummaryCell, SummaryTable, leaderboard, summarize)
from tsadbench.exceptions import BadVersionString, DuplicateVersion, NoCommonDatasets, ParseError

VERSION = re.compile(r"^(0|[1-9]\d*)\.(0|[1-9]\d*)\.(0|[1-9]\d*)$")
MEAN_THRESHOLD = 1.0
SPREAD_THRESHOLD = 2.0


def parse_version(version: str) -> tuple[int, int, int]:
    match = VERSION.match(version)
    if not match:
        raise BadVersionString(f"{version!r} is not a MAJOR.MINOR.PATCH version")
    return tuple(int(part) for part in match.groups())


def release_table(records) -> dict:
    """``{(pipeline, dataset, metric): value}`` for one benchmark run.

    Values are floats, ``None`` when undefined, or ``"ERROR"`` for failed cells.
    """
    records = list(records)
    table = {}
    for metric in METRICS:
        summary = summarize(records, metric)
        for (pipeline, dataset), cell in summary.cells.items():
            table[pipeline, dataset, metric] = FAILED if cell.failed else cell.value
    elapsed = defaultdict(list)
    for r in records:
        if r.status == "OK":
            elapsed[r.pipeline, r.dataset].append(r.elapsed)
    for (pipeline, dataset), values in elapsed.items():
        table[pipeline, dataset, "elapsed"] = float(np.mean(values))
    return table


def format_release(table) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for (pipeline, dataset, metric), value in sorted(table.items()):
        if value is None:
            value = ""
        elif value != FAILED:
            value = repr(float(value))
        writer.writerow([pipeline, dataset, metric, value])
    return out.getvalue()


def parse_release(text: str) -> dict:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != SUMMARY_HEADER:
        raise ParseError(1, f"expected header {','.join(SUMMARY_HEADER)}")
    table = {}
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise ParseError(line, "expected pipeline,dataset,metric,value")
        pipeline, dataset, metric, value = row
        if value in ("", FAILED):
            table[pipeline, dataset, metric] = value or None
            continue
        try:
            table[pipeline, dataset, metric] = float(value)
        except ValueError:
            raise ParseError(line, f"value {value!r} is not a number") from None
    return table


@dataclass
class ReleaseHistory:
    releases: dict   # version string -> release table, in version order

    @property
    def versions(self):
        return list(self.releases)

    def table(self, version):
        return self.releases[version]


def load_history(directory) -> ReleaseHistory:
    directory = Path(directory)
    found = []
    if directory.is_dir():
        for path in directory.glob("*.csv"):
            try:
                found.append((parse_version(path.stem), path))
            except BadVersionString:
                continue
    found.sort()
    return ReleaseHistory({path.stem: parse_release(path.read_text()) for _, path in found})


def history_add(directory, version: str, table: dict) -> Path:
    """Store ``table`` as release ``version``; a version can be added once only."""
    parse_version(version)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / f"{version}.csv"
    if target.exists():
        raise DuplicateVersion(f"release {version} is already recorded in {directory}")
    partial = directory / f".{version}.csv.part"
    partial.write_text(format_release(table))
    os.replace(partial, target)
    return target


@dataclass(frozen=True)
class ShiftReport:
    version_prev: str
    version_next: str
    pipeline: str
    mu: float | None
    delta: float | None
    flagged: bool
    datasets: int
    skipped: int


def _scores(table, metric):
    return {(p, d): v for (p, d, m), v in table.items()
            if m == metric and isinstance(v, float)}


def percentage_changes(old: dict, new: dict):
    """Percent change per shared dataset; datasets scoring 0 before are skipped."""
    changes, skipped = [], 0
    for dataset in sorted(set(old) & set(new)):
        if old[dataset] == 0:
            skipped += 1
            continue
        changes.append(100.0 * (new[dataset] - old[dataset]) / old[dataset])
    return changes, skipped


def shift_statistics(changes):
    """Mean and population standard deviation of percent changes, plus the flag."""
    if not changes:
        return None, None, False
    mu = float(np.mean(changes))
    delta = float(np.std(changes))
    return mu, delta, abs(mu) >= MEAN_THRESHOLD or delta >= SPREAD_THRESHOLD


def detect_shifts(history: ReleaseHistory, metric: str = "f1") -> list[ShiftReport]:
    """Compare every pair of consecutive releases pipeline by pipeline."""
    versions = history.versions
    if len(versions) < 2:
        raise ValueError("shift detection needs at least two releases")
    reports = []
    for prev, nxt in zip(versions, versions[1:]):
        old = _scores(history.table(prev), metric)
        new = _scores(history.table(nxt), metric)
        if not set(old) & set(new):
            raise NoCommonDatasets(f"releases {prev} and {nxt} share no scored datasets")
        pipelines = sorted({p for p, _ in old} & {p for p, _ in new})
        for pipeline in pipelines:
            changes, skipped = percentage_changes(
                {d: v for (p, d), v in old.items() if p == pipeline},
                {d: v for (p, d), v in new.items() if p == pipeline})
            mu, delta, flagged = shift_statistics(changes)
            reports.append(ShiftReport(prev, nxt, pipeline, mu, delta, flagged,
                                       len(changes), skipped))
    return reports


def format_shifts(reports) -> str:
    lines = ["version_prev,version_next,pipeline,mu,delta,flagged,datasets,skipped"]
    for r in reports:
        mu = "" if r.mu is None else f"{r.mu:.6g}"
        delta = "" if r.delta is None else f"{r.delta:.6g}"
        lines.append(f"{r.version_prev},{r.version_next},{r.pipeline},{mu},{delta},"
                     f"{str(r.flagged).lower()},{r.datasets},{r.skipped}")
    return "\n".join(lines) + "\n"


def release_summary(table: dict, metric: str = "f1") -> SummaryTable:
    summary = SummaryTable(metric)
    for (pipeline, dataset, m), value in table.items():
        if m == metric:
            summary.cells[pipeline, dataset] = (
                SummaryCell(None, failed=True) if value == FAILED else SummaryCell(value))
    return summary


def release_rankings(history: ReleaseHistory, baseline: str, metric: str = "f1"):
    """Leaderboard ranks of the pipelines present in every release, keyed by version.

    Ranks are renumbered 1..n within the shared pipelines and listed in
    pipeline-name order so that vectors from different releases line up.
    """
    boards = {v: leaderboard(release_summary(history.table(v), metric), baseline)
              for v in history.versions}
    shared = set.intersection(*({r.pipeline for r in rows} for rows in boards.values()))
    rankings = {}
    for version, rows in boards.items():
        order = [r.pipeline for r in rows if r.pipeline in shared]
        position = {p: i for i, p in enumerate(order, start=1)}
        rankings[version] = [position[p] for p in sorted(shared)]
    return sorted(shared), rankings

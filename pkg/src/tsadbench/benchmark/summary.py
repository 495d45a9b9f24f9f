"""Per-dataset summaries of benchmark records and the rankings built on them."""
from __future__ import annotations

import csv
import io
import itertools
import statistics
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from tsadbench.evaluation import ConfusionCounts, dataset_scores
from tsadbench.exceptions import LengthMismatch, MissingBaseline, NotPermutation, ParseError

METRICS = ("f1", "precision", "recall")
FAILED = "ERROR"
SUMMARY_HEADER = ("pipeline", "dataset", "metric", "value")
LEADERBOARD_HEADER = ("pipeline", "wins", "rank")


@dataclass(frozen=True)
class SummaryCell:
    """Median score of one (pipeline, dataset); ``failed`` when every
    experiment errored, ``value is None`` when the score is undefined."""

    value: float | None
    failed: bool = False


@dataclass
class SummaryTable:
    metric: str = "f1"
    cells: dict = field(default_factory=dict)   # (pipeline, dataset) -> SummaryCell

    @classmethod
    def from_mapping(cls, scores, metric: str = "f1") -> SummaryTable:
        """Build a table from ``{pipeline: {dataset: value}}``."""
        table = cls(metric)
        for pipeline, row in scores.items():
            for dataset, value in row.items():
                table.cells[pipeline, dataset] = SummaryCell(
                    None if value is None else float(value))
        return table

    @property
    def pipelines(self):
        return sorted({p for p, _ in self.cells})

    @property
    def datasets(self):
        return sorted({d for _, d in self.cells})

    def value(self, pipeline, dataset):
        cell = self.cells.get((pipeline, dataset))
        if cell is None or cell.failed:
            return None
        return cell.value

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for (pipeline, dataset), cell in sorted(self.cells.items()):
            value = FAILED if cell.failed else ("" if cell.value is None else repr(cell.value))
            writer.writerow([pipeline, dataset, self.metric, value])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, metric: str = "f1") -> SummaryTable:
        """Read the rows of ``metric`` from a ``pipeline,dataset,metric,value`` sheet."""
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or tuple(header) != SUMMARY_HEADER:
            raise ParseError(1, f"expected header {','.join(SUMMARY_HEADER)}")
        table = cls(metric)
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(line, "expected pipeline,dataset,metric,value")
            pipeline, dataset, row_metric, value = row
            if row_metric != metric:
                continue
            if value == FAILED:
                table.cells[pipeline, dataset] = SummaryCell(None, failed=True)
                continue
            try:
                table.cells[pipeline, dataset] = SummaryCell(float(value) if value else None)
            except ValueError:
                raise ParseError(line, f"value {value!r} is not a number") from None
        return table


def median(values):
    """Middle element, or the mean of the two middle elements."""
    return statistics.median(values)


def summarize(records, metric: str = "f1") -> SummaryTable:
    """Pool counts per iteration for every (pipeline, dataset), then take the
    median of the metric across iterations.

    ERROR records are left out of the pooling. A cell whose records all
    errored is marked failed; iterations whose pooled metric is undefined do
    not enter the median, and a cell with no defined iteration is undefined.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}")
    records = list(records)
    if not records:
        raise ValueError("summarize needs at least one record")
    pooled = defaultdict(lambda: defaultdict(list))
    cells = set()
    for r in records:
        cells.add((r.pipeline, r.dataset))
        if r.status == "OK":
            pooled[r.pipeline, r.dataset][r.iteration].append(
                ConfusionCounts(r.tp, r.fp, r.fn, r.tn))

    table = SummaryTable(metric)
    for cell in sorted(cells):
        if cell not in pooled:
            table.cells[cell] = SummaryCell(None, failed=True)
            continue
        values = [getattr(dataset_scores(counts), metric)
                  for _, counts in sorted(pooled[cell].items())]
        values = [v for v in values if v is not None]
        table.cells[cell] = SummaryCell(median(values) if values else None)
    return table


@dataclass(frozen=True)
class LeaderboardRow:
    pipeline: str
    wins: int
    rank: int
    mean_score: float


def leaderboard(summary: SummaryTable, baseline: str = "arima_like") -> list[LeaderboardRow]:
    """Count the datasets where each pipeline beats ``baseline`` and rank them.

    A win needs a strictly higher score. Failed or undefined cells never win;
    a defined score beats a failed or undefined baseline. Ties on wins are
    broken by the mean score over all datasets (undefined counted as 0),
    then by name.
    """
    pipelines = summary.pipelines
    if baseline not in pipelines:
        raise MissingBaseline(f"baseline {baseline!r} is not in the summary")
    datasets = summary.datasets
    rows = []
    for pipeline in pipelines:
        wins = 0
        for dataset in datasets:
            mine = summary.value(pipeline, dataset)
            theirs = summary.value(baseline, dataset)
            if mine is not None and (theirs is None or mine > theirs):
                wins += 1
        scores = [summary.value(pipeline, d) or 0.0 for d in datasets]
        rows.append((pipeline, wins, float(np.mean(scores)) if scores else 0.0))
    rows.sort(key=lambda row: (-row[1], -row[2], row[0]))
    return [LeaderboardRow(p, w, rank, m) for rank, (p, w, m) in enumerate(rows, start=1)]


def format_leaderboard(rows) -> str:
    lines = [",".join(LEADERBOARD_HEADER)]
    lines.extend(f"{r.pipeline},{r.wins},{r.rank}" for r in rows)
    return "\n".join(lines) + "\n"


def spearman_rho(ranks_a, ranks_b) -> float:
    """Spearman's rank correlation of two rankings without ties."""
    a, b = list(ranks_a), list(ranks_b)
    if len(a) != len(b):
        raise LengthMismatch(f"rankings have lengths {len(a)} and {len(b)}")
    n = len(a)
    expected = list(range(1, n + 1))
    for ranks in (a, b):
        if sorted(ranks) != expected:
            raise NotPermutation(f"{ranks} is not a permutation of 1..{n}")
    if n < 2:
        raise LengthMismatch("rank correlation needs at least two items")
    d2 = sum((x - y) ** 2 for x, y in zip(a, b))
    return 1.0 - 6.0 * d2 / (n * (n * n - 1))


def spearman_matrix(rankings):
    """Pairwise rho over ``{run: ranks}``; returns ``(names, matrix, mean_off_diagonal)``."""
    names = list(rankings)
    matrix = np.eye(len(names))
    for (i, a), (j, b) in itertools.combinations(enumerate(names), 2):
        matrix[i, j] = matrix[j, i] = spearman_rho(rankings[a], rankings[b])
    pairs = [matrix[i, j] for i, j in itertools.combinations(range(len(names)), 2)]
    return names, matrix, float(np.mean(pairs)) if pairs else None


def parse_rank_table(text: str):
    """``pipeline,run1,run2,...`` rows into ``{run: ranks}`` in pipeline order."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or len(header) < 3:
        raise ParseError(1, "expected pipeline followed by at least two run columns")
    runs = {name: [] for name in header[1:]}
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(line, f"expected {len(header)} fields")
        for name, value in zip(header[1:], row[1:]):
            try:
                runs[name].append(int(value))
            except ValueError:
                raise ParseError(line, f"rank {value!r} is not an integer") from None
    return runs


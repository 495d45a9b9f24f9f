"""Readers and writers for the CSV files holding signals and intervals."""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from pathlib import Path

import numpy as np

from tsadbench.core.types import AnomalyInterval, TimeSeries
from tsadbench.exceptions import OverlapError, ParseError


def _rows(text):
    """Non-empty CSV rows with 1-based line numbers, header row dropped."""
    rows = [(n, row) for n, row in enumerate(csv.reader(io.StringIO(text)), start=1)
            if row and any(field.strip() for field in row)]
    if rows:
        first = rows[0][1][0].strip()
        try:
            int(first)
        except ValueError:
            rows = rows[1:]
    return rows


def _int(field, line, what):
    try:
        return int(field)
    except ValueError:
        raise ParseError(line, f"{what} {field!r} is not an integer") from None


def parse_signal_csv(text: str) -> TimeSeries:
    """``timestamp,value[,value...]``; an empty value field is a missing sample."""
    timestamps, values = [], []
    width = None
    for line, row in _rows(text):
        if width is None:
            width = len(row)
            if width < 2:
                raise ParseError(line, "expected a timestamp and at least one value")
        elif len(row) != width:
            raise ParseError(line, f"expected {width} fields, got {len(row)}")
        timestamp = _int(row[0], line, "timestamp")
        if timestamps and timestamp <= timestamps[-1]:
            raise ParseError(line, f"timestamp {timestamp} does not increase")
        try:
            values.append([float(v) if v.strip() else np.nan for v in row[1:]])
        except ValueError:
            raise ParseError(line, f"non-numeric value in {row[1:]!r}") from None
        timestamps.append(timestamp)
    if not timestamps:
        raise ParseError(0, "signal file holds no samples")
    return TimeSeries(np.array(timestamps, dtype=np.int64), np.array(values))


def read_signal_csv(path) -> TimeSeries:
    return parse_signal_csv(Path(path).read_text())


def format_signal_csv(series: TimeSeries) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    names = ["value"] if series.n_channels == 1 else [
        f"value_{c}" for c in range(series.n_channels)]
    writer.writerow(["timestamp", *names])
    for t, row in zip(series.timestamps, series.values):
        writer.writerow([int(t), *("" if np.isnan(v) else repr(float(v)) for v in row)])
    return out.getvalue()


def write_signal_csv(series: TimeSeries, path):
    Path(path).write_text(format_signal_csv(series))


def _validate_group(intervals, what):
    intervals.sort()
    for previous, current in zip(intervals, intervals[1:]):
        if current.start <= previous.end:
            raise OverlapError(f"{what}: {previous} overlaps {current}")
    return intervals


def parse_truth_csv(text: str, signals=()) -> dict[str, list[AnomalyInterval]]:
    """``signal,start,end`` rows grouped per signal; each group is sorted and
    checked for overlaps."""
    truth = defaultdict(list)
    for name in signals:
        truth[name]
    rows = [(n, row) for n, row in enumerate(csv.reader(io.StringIO(text)), start=1)
            if row and any(field.strip() for field in row)]
    if rows and rows[0][1][0].strip() == "signal":
        rows = rows[1:]
    for line, row in rows:
        if len(row) != 3:
            raise ParseError(line, f"expected signal,start,end; got {row!r}")
        start = _int(row[1], line, "start")
        end = _int(row[2], line, "end")
        if start > end:
            raise ParseError(line, f"start {start} > end {end}")
        truth[row[0].strip()].append(AnomalyInterval(start, end))
    return {name: _validate_group(intervals, name) for name, intervals in truth.items()}


def read_truth_csv(path, signals=()):
    return parse_truth_csv(Path(path).read_text(), signals)


def format_truth_csv(truth) -> str:
    lines = ["signal,start,end"]
    for name in sorted(truth):
        lines.extend(f"{name},{i.start},{i.end}" for i in truth[name])
    return "\n".join(lines) + "\n"


def parse_intervals_csv(text: str) -> list[AnomalyInterval]:
    """``start,end`` rows (the ``evaluate`` command's input)."""
    intervals = []
    for line, row in _rows(text):
        if len(row) < 2:
            raise ParseError(line, "expected start,end")
        start = _int(row[0], line, "start")
        end = _int(row[1], line, "end")
        if start > end:
            raise ParseError(line, f"start {start} > end {end}")
        intervals.append(AnomalyInterval(start, end))
    return intervals


def read_intervals_csv(path):
    return parse_intervals_csv(Path(path).read_text())


def format_intervals_csv(intervals) -> str:
    return "start,end\n" + "".join(f"{i.start},{i.end}\n" for i in intervals)

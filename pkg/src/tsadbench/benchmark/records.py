"""Experiment records and their CSV sheets."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

from tsadbench.exceptions import ParseError

DETAILED_HEADER = ("dataset", "pipeline", "signal", "iteration", "f1", "precision", "recall",
                   "tn", "fp", "fn", "tp", "status", "elapsed", "run_id")
TIMINGS_HEADER = ("dataset", "pipeline", "signal", "iteration", "primitive", "seconds")
STATUSES = ("OK", "ERROR")
_FLOATS = ("f1", "precision", "recall")
_INTS = ("tn", "fp", "fn", "tp")


@dataclass(frozen=True)
class ExperimentRecord:
    dataset: str
    pipeline: str
    signal: str
    iteration: int
    f1: float | None = None
    precision: float | None = None
    recall: float | None = None
    tn: int | None = None
    fp: int | None = None
    fn: int | None = None
    tp: int | None = None
    status: str = "OK"
    elapsed: float = 0.0
    run_id: str = "0"
    # not part of the detailed sheet
    timings: dict = field(default_factory=dict, compare=False, repr=False)
    length: int | None = field(default=None, compare=False, repr=False)
    error: str | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}")
        if self.status == "ERROR" and any(
                getattr(self, name) is not None for name in _FLOATS + _INTS):
            raise ValueError("an ERROR record carries no scores")
        if self.elapsed < 0:
            raise ValueError("elapsed must be non-negative")

    @property
    def sort_key(self):
        return (self.pipeline, self.dataset, self.signal, self.iteration)


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_records(records) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(DETAILED_HEADER)
    for record in records:
        writer.writerow([_cell(getattr(record, name)) for name in DETAILED_HEADER])
    return out.getvalue()


def format_timings(records) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TIMINGS_HEADER)
    for r in records:
        for primitive, seconds in r.timings.items():
            writer.writerow([r.dataset, r.pipeline, r.signal, r.iteration, primitive,
                             repr(float(seconds))])
    return out.getvalue()


def _optional(value, cast, line, name):
    if value == "":
        return None
    try:
        return cast(value)
    except ValueError:
        raise ParseError(line, f"{name} {value!r} is not a valid {cast.__name__}") from None


def parse_records(text: str) -> list[ExperimentRecord]:
    """Read a detailed sheet; the header must match exactly."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != DETAILED_HEADER:
        raise ParseError(1, f"expected header {','.join(DETAILED_HEADER)}")
    records = []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(DETAILED_HEADER):
            raise ParseError(line, f"expected {len(DETAILED_HEADER)} fields, got {len(row)}")
        values = dict(zip(DETAILED_HEADER, row))
        kwargs = {name: values[name] for name in ("dataset", "pipeline", "signal",
                                                  "status", "run_id")}
        kwargs["iteration"] = _optional(values["iteration"], int, line, "iteration")
        if kwargs["iteration"] is None:
            raise ParseError(line, "iteration is required")
        for name in _FLOATS:
            kwargs[name] = _optional(values[name], float, line, name)
        for name in _INTS:
            kwargs[name] = _optional(values[name], int, line, name)
        kwargs["elapsed"] = _optional(values["elapsed"], float, line, "elapsed") or 0.0
        try:
            records.append(ExperimentRecord(**kwargs))
        except ValueError as error:
            raise ParseError(line, str(error)) from None
    return records


def write_records(records, path):
    Path(path).write_text(format_records(records))


def read_records(path):
    return parse_records(Path(path).read_text())


def write_timings(records, path):
    Path(path).write_text(format_timings(records))


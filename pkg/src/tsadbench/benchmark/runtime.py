"""Wall-time accounting: elapsed time against signal length, per primitive."""
from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

# timings are measured inside the elapsed window, so a small excess is clock noise
TOLERANCE = 1e-3


@dataclass
class RuntimeRow:
    pipeline: str
    bucket: int          # signals of length in [bucket, 10 * bucket)
    experiments: int = 0
    total: float = 0.0
    primitives: dict = field(default_factory=dict)

    @property
    def mean(self):
        return self.total / self.experiments if self.experiments else 0.0


@dataclass
class RuntimeReport:
    rows: list
    warnings: list


def length_bucket(length: int) -> int:
    return 10 ** int(math.floor(math.log10(max(length, 1))))


def runtime_report(records) -> RuntimeReport:
    """Group elapsed time by pipeline and order of magnitude of the signal length.

    Records without a known length (for instance read back from a CSV sheet)
    are put in bucket 0. A warning is emitted for every experiment whose
    per-primitive times add up to more than its elapsed time.
    """
    records = list(records)
    if not records:
        raise ValueError("runtime_report needs at least one record")
    rows = {}
    warnings = []
    for r in records:
        if r.status != "OK":
            continue
        bucket = 0 if r.length is None else length_bucket(r.length)
        row = rows.setdefault((r.pipeline, bucket), RuntimeRow(r.pipeline, bucket))
        row.experiments += 1
        row.total += r.elapsed
        for primitive, seconds in r.timings.items():
            row.primitives[primitive] = row.primitives.get(primitive, 0.0) + seconds
        spent = sum(r.timings.values())
        if spent > r.elapsed + TOLERANCE:
            message = (f"{r.pipeline} on {r.dataset}/{r.signal} iteration {r.iteration}: "
                       f"primitive times {spent:.4f}s exceed elapsed {r.elapsed:.4f}s")
            logger.warning(message)
            warnings.append(message)
    return RuntimeReport(sorted(rows.values(), key=lambda row: (row.pipeline, row.bucket)),
                         warnings)


def format_runtime(report: RuntimeReport) -> str:
    lines = ["pipeline,length_bucket,experiments,total_seconds,mean_seconds"]
    for row in report.rows:
        lines.append(f"{row.pipeline},{row.bucket},{row.experiments},"
                     f"{row.total:.6f},{row.mean:.6f}")
    return "\n".join(lines) + "\n"


def timings_by_primitive(records):
    """``{pipeline: {primitive: total seconds}}`` over all OK records."""
    totals = defaultdict(lambda: defaultdict(float))
    for r in records:
        for primitive, seconds in r.timings.items():
            totals[r.pipeline][primitive] += seconds
    return {p: dict(t) for p, t in totals.items()}

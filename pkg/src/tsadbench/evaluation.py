"""Segment-based scoring of detected against known anomalous intervals.

Two counting methods are offered. ``overlapping`` counts whole intervals:
a true interval is found if any detection touches it. ``weighted`` counts
samples: each grid point of the domain at the native step is a
true/false positive/negative depending on interval membership.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from tsadbench.core.types import AnomalyInterval, as_intervals, check_intervals
from tsadbench.exceptions import MalformedIntervals

METHODS = ("overlapping", "weighted")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int | None = None

    def __post_init__(self):
        for name in ("tp", "fp", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.tn is not None and self.tn < 0:
            raise ValueError("tn must be non-negative")

    def __add__(self, other: ConfusionCounts) -> ConfusionCounts:
        tn = None if self.tn is None or other.tn is None else self.tn + other.tn
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, tn)


@dataclass(frozen=True)
class Scores:
    """Pooled scores; ``None`` where the ratio is 0/0."""

    precision: float | None
    recall: float | None
    f1: float | None


def _prepare(detected, truth, domain):
    t0, t1 = int(domain[0]), int(domain[1])
    if t0 > t1:
        raise MalformedIntervals(f"domain start {t0} > end {t1}")
    detected, truth = as_intervals(detected), as_intervals(truth)
    check_intervals(detected, (t0, t1))
    check_intervals(truth, (t0, t1))
    return detected, truth, t0, t1


def overlapping_segment_counts(detected: Sequence[AnomalyInterval],
                               truth: Sequence[AnomalyInterval], domain) -> ConfusionCounts:
    """Interval-level counts; ``tn`` is left undefined.

    Both lists must hold sorted non-overlapping intervals within the inclusive
    ``domain``.
    """
    detected, truth, _, _ = _prepare(detected, truth, domain)
    # two-pointer sweep over the sorted lists
    hit_truth = [False] * len(truth)
    hit_detected = [False] * len(detected)
    i = j = 0
    while i < len(detected) and j < len(truth):
        if detected[i].overlaps(truth[j]):
            hit_detected[i] = hit_truth[j] = True
        if detected[i].end < truth[j].end:
            i += 1
        else:
            j += 1
    tp = sum(hit_truth)
    return ConfusionCounts(tp=tp, fp=hit_detected.count(False), fn=len(truth) - tp)


def _grid_count(a, b, t0, step):
    """Number of grid points ``t0 + k*step`` inside ``[a, b)``."""
    return -((t0 - b) // step) + ((t0 - a) // step)


def weighted_segment_counts(detected: Sequence[AnomalyInterval],
                            truth: Sequence[AnomalyInterval], domain,
                            step: int = 1) -> ConfusionCounts:
    """Sample-level counts over the grid ``t0, t0+step, ...`` below ``t1``.

    The domain is the half-open span ``[t0, t1)`` and an interval ``[s, e]``
    covers the half-open span ``[s, e + step)``. The domain is split at every
    interval edge and each piece adds its number of grid points to the cell
    given by its detected/true membership, so ``tp + fp + fn + tn`` equals the
    number of samples in the domain.
    """
    detected, truth, t0, t1 = _prepare(detected, truth, domain)
    step = int(step)
    if step < 1:
        raise ValueError("step must be a positive integer")
    stop = t1
    edges = {t0, stop}
    for interval in (*detected, *truth):
        edges.add(interval.start)
        edges.add(min(interval.end + step, stop))
    edges = sorted(edges)

    def membership(intervals):
        # coverage of each elementary piece, found by a sweep
        covered, k = [], 0
        for a in edges[:-1]:
            while k < len(intervals) and intervals[k].end + step <= a:
                k += 1
            covered.append(k < len(intervals) and intervals[k].start <= a)
        return covered

    in_detected, in_truth = membership(detected), membership(truth)
    cells = {(True, True): 0, (True, False): 0, (False, True): 0, (False, False): 0}
    for a, b, d, t in zip(edges[:-1], edges[1:], in_detected, in_truth):
        cells[d, t] += _grid_count(a, b, t0, step)
    return ConfusionCounts(tp=cells[True, True], fp=cells[True, False],
                           fn=cells[False, True], tn=cells[False, False])


def segment_counts(detected, truth, domain, method: str = "overlapping", step: int = 1):
    if method == "overlapping":
        return overlapping_segment_counts(detected, truth, domain)
    if method == "weighted":
        return weighted_segment_counts(detected, truth, domain, step)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def _ratio(numerator, denominator):
    return None if denominator == 0 else numerator / denominator


def scores_from_counts(counts: ConfusionCounts) -> Scores:
    precision = _ratio(counts.tp, counts.tp + counts.fp)
    recall = _ratio(counts.tp, counts.tp + counts.fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return Scores(precision, recall, f1)


def dataset_scores(per_signal: Iterable[ConfusionCounts]) -> Scores:
    """Pool the counts of every signal of a dataset, then score the totals."""
    per_signal = list(per_signal)
    if not per_signal:
        raise ValueError("dataset_scores needs at least one signal")
    tp = sum(c.tp for c in per_signal)
    fp = sum(c.fp for c in per_signal)
    fn = sum(c.fn for c in per_signal)
    return scores_from_counts(ConfusionCounts(tp, fp, fn))


def is_undefined(value) -> bool:
    return value is None or (isinstance(value, float) and math.isnan(value))

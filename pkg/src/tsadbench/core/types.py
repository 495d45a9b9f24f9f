from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from tsadbench.exceptions import MalformedIntervals


def _readonly(array):
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Timestamped signal with ``T`` rows and ``n`` channels.

    ``timestamps`` are integer seconds, strictly increasing. ``values`` is
    always stored as a ``(T, n)`` float matrix; pass a 1-D array for a
    univariate signal. NaN marks a missing value.
    """

    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        timestamps = np.asarray(self.timestamps)
        if timestamps.ndim != 1:
            raise ValueError("timestamps must be one-dimensional")
        if timestamps.size and not np.issubdtype(timestamps.dtype, np.integer):
            as_int = timestamps.astype(np.int64)
            if not np.array_equal(as_int, timestamps):
                raise ValueError("timestamps must be integers")
            timestamps = as_int
        timestamps = timestamps.astype(np.int64)

        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[1] < 1:
            raise ValueError("values must be a (T, n) matrix with n >= 1")
        if values.shape[0] != timestamps.shape[0]:
            raise ValueError(
                f"{timestamps.shape[0]} timestamps for {values.shape[0]} value rows")
        if np.any(np.diff(timestamps) <= 0):
            raise ValueError("timestamps must be strictly increasing")

        object.__setattr__(self, "timestamps", _readonly(timestamps))
        object.__setattr__(self, "values", _readonly(values))

    def __len__(self):
        return self.timestamps.shape[0]

    @property
    def n_channels(self):
        return self.values.shape[1]

    @property
    def step(self):
        """Native sampling step: the smallest gap between timestamps (1 if T < 2)."""
        if len(self) < 2:
            return 1
        return int(np.diff(self.timestamps).min())

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (np.array_equal(self.timestamps, other.timestamps)
                and np.array_equal(self.values, other.values, equal_nan=True))

    __hash__ = None


@dataclass(frozen=True, order=True)
class AnomalyInterval:
    start: int
    end: int
    severity: float | None = None

    def __post_init__(self):
        if self.start > self.end:
            raise MalformedIntervals(f"interval start {self.start} > end {self.end}")

    def overlaps(self, other: AnomalyInterval) -> bool:
        # closed intervals: touching endpoints count
        return self.start <= other.end and other.start <= self.end


def as_intervals(items: Iterable) -> list[AnomalyInterval]:
    """Coerce ``(start, end[, severity])`` tuples or intervals into a list."""
    out = []
    for item in items:
        if isinstance(item, AnomalyInterval):
            out.append(item)
        else:
            out.append(AnomalyInterval(int(item[0]), int(item[1]),
                                       *(float(x) for x in item[2:3])))
    return out


def check_intervals(intervals: Sequence[AnomalyInterval], domain=None):
    """Raise :class:`MalformedIntervals` unless the intervals are sorted without
    overlap within ``domain``.

    ``domain`` is an inclusive ``(t0, t1)`` pair.
    """
    previous = None
    for interval in intervals:
        if interval.start > interval.end:
            raise MalformedIntervals(f"{interval} has start > end")
        if previous is not None and interval.start <= previous.end:
            raise MalformedIntervals(f"{previous} and {interval} are unsorted or overlap")
        if domain is not None and (interval.start < domain[0] or interval.end > domain[1]):
            raise MalformedIntervals(f"{interval} lies outside domain {tuple(domain)}")
        previous = interval


def normalize_intervals(intervals, lower, upper):
    """Clip to ``[lower, upper]``, sort and merge overlapping intervals.

    Merged intervals keep the largest severity of their parts.
    """
    clipped = []
    for interval in sorted(intervals, key=lambda i: (i.start, i.end)):
        start, end = max(interval.start, lower), min(interval.end, upper)
        if start > end:
            continue
        clipped.append([start, end, interval.severity])

    merged = []
    for start, end, severity in clipped:
        if merged and start <= merged[-1][1]:
            last = merged[-1]
            last[1] = max(last[1], end)
            if severity is not None:
                last[2] = severity if last[2] is None else max(last[2], severity)
        else:
            merged.append([start, end, severity])
    return [AnomalyInterval(int(s), int(e), sev) for s, e, sev in merged]

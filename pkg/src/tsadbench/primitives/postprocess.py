"""Moving-window thresholding of an error series into anomalous intervals."""
from __future__ import annotations

import numpy as np

from tsadbench.core.hyperparameters import resolve_fraction
from tsadbench.core.types import AnomalyInterval
from tsadbench.primitives.error_functions import ErrorSeries


def flag_windows(errors, window_size: int, z: float) -> np.ndarray:
    """Boolean mask of ``e > mean + z * std`` computed per consecutive window."""
    errors = np.asarray(errors, dtype=float)
    flagged = np.zeros(errors.shape[0], dtype=bool)
    window_size = max(1, int(window_size))
    for start in range(0, errors.shape[0], window_size):
        chunk = errors[start:start + window_size]
        threshold = chunk.mean() + z * chunk.std()
        flagged[start:start + window_size] = chunk > threshold
    return flagged


def merge_runs(flagged, max_gap: int):
    """``[first, last]`` index runs of ``flagged``; runs at most ``max_gap`` unflagged
    samples apart are merged."""
    positions = np.flatnonzero(flagged)
    if positions.size == 0:
        return []
    runs = [[int(positions[0]), int(positions[0])]]
    for p in positions[1:]:
        if p - runs[-1][1] - 1 <= max_gap:
            runs[-1][1] = int(p)
        else:
            runs.append([int(p), int(p)])
    return runs


def find_anomalies(errors: ErrorSeries, window_size=None, window_size_perc=None,
                   z: float = 4.0, padding: int = 0,
                   min_percent_gap: float = 0.0) -> list[AnomalyInterval]:
    """Threshold ``errors`` window by window and return the anomalous intervals.

    The window length is ``window_size`` samples, or ``window_size_perc`` of
    the error series length when given (whole series if neither is set).
    Flagged runs separated by at most ``max(padding, min_percent_gap% of the
    series length)`` unflagged samples are merged. Each interval spans the
    timestamps of its first and last flagged sample; its severity is the
    largest flagged error inside it.
    """
    n = len(errors)
    if n == 0:
        return []
    if window_size_perc is not None:
        window = resolve_fraction(float(window_size_perc), n)
    elif window_size is not None:
        window = int(window_size)
    else:
        window = n

    values = errors.errors
    flagged = flag_windows(values, window, float(z))
    max_gap = max(int(padding), int(min_percent_gap / 100.0 * n))
    intervals = []
    for first, last in merge_runs(flagged, max_gap):
        severity = float(values[first:last + 1][flagged[first:last + 1]].max())
        intervals.append(AnomalyInterval(int(errors.index[first]), int(errors.index[last]),
                                         severity))
    return intervals

"""Self-join matrix profile with a STOMP-style running dot product."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from tsadbench.core.types import TimeSeries
from tsadbench.exceptions import MultivariateUnsupported, SeriesTooShort
from tsadbench.primitives.error_functions import ErrorSeries

# candidates this close to the running minimum get their distance recomputed
# directly; the dot-product identity loses digits when corr is near 1
REFINE_BAND = 1e-3


@dataclass(frozen=True)
class MatrixProfile:
    profile: np.ndarray
    profile_index: np.ndarray
    m: int
    exclusion: int


def exclusion_radius(m: int) -> int:
    return math.ceil(m / 2)


def _as_vector(series):
    if isinstance(series, TimeSeries):
        if series.n_channels != 1:
            raise MultivariateUnsupported("matrix profile needs a univariate series")
        return np.asarray(series.values[:, 0], dtype=float)
    values = np.asarray(series, dtype=float)
    if values.ndim != 1:
        raise MultivariateUnsupported("matrix profile needs a univariate series")
    return values


def window_statistics(x, m):
    """Per-window mean and std of every length-``m`` window, plus a constant flag."""
    windows = sliding_window_view(x, m)
    constant = windows.max(axis=1) == windows.min(axis=1)
    return windows.mean(axis=1), windows.std(axis=1), constant


def matrix_profile(series, m: int) -> MatrixProfile:
    """z-normalized nearest-neighbour distance of every length-``m`` window.

    Window ``j`` is a candidate neighbour of window ``i`` when
    ``|i - j| >= ceil(m / 2)``. A constant window is at distance 0 from
    another constant window and ``sqrt(m)`` from anything else. Ties pick
    the smallest neighbour index.

    Distances come from a running dot product; those within ``REFINE_BAND``
    of a row's minimum are recomputed from the normalized windows.
    """
    m = int(m)
    x = _as_vector(series)
    if m < 2:
        raise ValueError("window length m must be >= 2")
    if len(x) < 2 * m:
        raise SeriesTooShort(f"{len(x)} samples; matrix profile with m={m} needs {2 * m}")

    # z-normalized distances ignore offsets; centering keeps the dot products small
    x = x - x.mean()
    n = len(x) - m + 1
    excl = exclusion_radius(m)
    mu, sigma, constant = window_statistics(x, m)
    sigma = np.where(constant, 1.0, sigma)

    windows = sliding_window_view(x, m)
    first_column = windows @ x[:m]
    qt = first_column.copy()
    positions = np.arange(n)
    sqrt_m = math.sqrt(m)

    profile = np.empty(n)
    profile_index = np.empty(n, dtype=np.int64)
    for i in range(n):
        if i > 0:
            qt[1:] = qt[:-1] - x[i - 1] * x[:n - 1] + x[i + m - 1] * x[m:m + n - 1]
            qt[0] = first_column[i]
        corr = (qt - m * mu[i] * mu) / (m * sigma[i] * sigma)
        distance = np.sqrt(np.clip(2 * m * (1 - corr), 0.0, None))
        if constant[i]:
            distance = np.where(constant, 0.0, sqrt_m)
        else:
            distance = np.where(constant, sqrt_m, distance)
        distance[np.abs(positions - i) < excl] = np.inf
        if not constant[i]:
            close = np.flatnonzero((distance <= distance.min() + REFINE_BAND) & ~constant)
            query = (x[i:i + m] - mu[i]) / sigma[i]
            distance[close] = np.sqrt(np.sum(
                ((windows[close] - mu[close, None]) / sigma[close, None] - query) ** 2, axis=1))
        j = int(np.argmin(distance))
        profile[i] = distance[j]
        profile_index[i] = j
    return MatrixProfile(profile, profile_index, m, excl)


def matrix_profile_scores(signal: TimeSeries, window_size: int = 100) -> ErrorSeries:
    """Matrix profile as an anomaly score, each window reported at its centre timestamp."""
    mp = matrix_profile(signal, window_size)
    centre = int(window_size) // 2
    index = signal.timestamps[centre:centre + len(mp.profile)]
    return ErrorSeries(np.array(index), mp.profile)

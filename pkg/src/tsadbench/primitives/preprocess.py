"""Signal conditioning: aggregation, imputation, scaling and windowing."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from tsadbench.core.types import TimeSeries
from tsadbench.exceptions import AllMissing, SeriesTooShort


class ConstantChannelWarning(UserWarning):
    pass


def _bucket(series, interval):
    offsets = (series.timestamps - series.timestamps[0]) // interval
    n_buckets = int(offsets[-1]) + 1
    return offsets, n_buckets


def bucket_counts(series: TimeSeries, interval: int) -> np.ndarray:
    """Number of samples falling in every aggregation bucket."""
    offsets, n_buckets = _bucket(series, interval)
    return np.bincount(offsets, minlength=n_buckets)


def time_segments_aggregate(signal: TimeSeries, interval: int | None = None,
                            method: str = "mean") -> TimeSeries:
    """Average samples into buckets of ``interval`` seconds.

    Buckets start at the first timestamp. Buckets holding no (non-missing)
    sample come out as NaN for the imputer to fill. ``interval=None`` uses
    the signal's native step.
    """
    if method != "mean":
        raise ValueError(f"unsupported aggregation method {method!r}")
    interval = signal.step if interval is None else int(interval)
    if interval < 1:
        raise ValueError("interval must be >= 1")

    offsets, n_buckets = _bucket(signal, interval)
    values = signal.values
    present = ~np.isnan(values)
    sums = np.zeros((n_buckets, values.shape[1]))
    counts = np.zeros((n_buckets, values.shape[1]))
    np.add.at(sums, offsets, np.where(present, values, 0.0))
    np.add.at(counts, offsets, present)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / counts, np.nan)

    timestamps = signal.timestamps[0] + interval * np.arange(n_buckets, dtype=np.int64)
    return TimeSeries(timestamps, means)


def impute(signal: TimeSeries) -> TimeSeries:
    """Replace missing values by the mean of the channel's observed values."""
    values = np.array(signal.values)
    missing = np.isnan(values)
    if not missing.any():
        return signal
    if missing.all(axis=0).any():
        raise AllMissing("a channel has no observed value to impute from")
    means = np.nanmean(values, axis=0)
    values[missing] = np.broadcast_to(means, values.shape)[missing]
    return TimeSeries(signal.timestamps, values)


@dataclass(frozen=True)
class ScalerState:
    data_min: np.ndarray
    data_max: np.ndarray
    feature_range: tuple
    constant: np.ndarray   # True where max == min; such channels map to the range midpoint


def min_max_fit(signal: TimeSeries, feature_range=(-1.0, 1.0)) -> ScalerState:
    values = signal.values
    data_min = np.nanmin(values, axis=0)
    data_max = np.nanmax(values, axis=0)
    constant = data_max == data_min
    if constant.any():
        warnings.warn(f"constant channel(s) {np.flatnonzero(constant).tolist()} scaled to "
                      "the range midpoint", ConstantChannelWarning, stacklevel=2)
    low, high = feature_range
    if not low < high:
        raise ValueError("feature_range must be increasing")
    return ScalerState(data_min, data_max, (float(low), float(high)), constant)


def _affine(state):
    low, high = state.feature_range
    span = np.where(state.constant, 1.0, state.data_max - state.data_min)
    scale = (high - low) / span
    return scale, low


def min_max_transform(state: ScalerState, signal: TimeSeries) -> TimeSeries:
    """Affine map of the fitted min/max onto the range; no clipping."""
    scale, low = _affine(state)
    scaled = (signal.values - state.data_min) * scale + low
    midpoint = sum(state.feature_range) / 2
    scaled = np.where(state.constant, midpoint, scaled)
    return TimeSeries(signal.timestamps, scaled)


def min_max_inverse(state: ScalerState, signal: TimeSeries) -> TimeSeries:
    scale, low = _affine(state)
    values = (signal.values - low) / scale + state.data_min
    values = np.where(state.constant, state.data_min, values)
    return TimeSeries(signal.timestamps, values)


def min_max_scale(signal: TimeSeries, feature_range=(-1.0, 1.0)):
    """Fit and apply in one go; returns ``(scaled, state)``."""
    state = min_max_fit(signal, feature_range)
    return min_max_transform(state, signal), state


@dataclass(frozen=True)
class WindowedData:
    """Sliding windows over a signal.

    ``X`` is ``(num_windows, window_size)`` for univariate signals and
    ``(num_windows, window_size, n)`` otherwise; ``y`` likewise with
    ``target_size``. ``index[i]`` is the timestamp of the first target of
    window ``i``; ``X_index`` holds one timestamp per sample covered by ``X``.
    """

    X: np.ndarray
    y: np.ndarray
    index: np.ndarray
    X_index: np.ndarray


def rolling_window_sequences(signal: TimeSeries, window_size: int,
                             target_size: int = 1) -> WindowedData:
    window_size, target_size = int(window_size), int(target_size)
    if window_size < 1 or target_size < 1:
        raise ValueError("window_size and target_size must be >= 1")
    length = len(signal)
    if length < window_size + target_size:
        raise SeriesTooShort(f"{length} samples cannot hold a window of {window_size} "
                             f"plus {target_size} targets")

    values = signal.values
    num_windows = length - window_size - target_size + 1
    # sliding_window_view puts the window axis last
    X = sliding_window_view(values[:length - target_size], window_size, axis=0)
    y = sliding_window_view(values[window_size:], target_size, axis=0)
    X = np.ascontiguousarray(np.moveaxis(X, -1, 1)[:num_windows])
    y = np.ascontiguousarray(np.moveaxis(y, -1, 1)[:num_windows])
    if values.shape[1] == 1:
        X, y = X[..., 0], y[..., 0]

    index = signal.timestamps[window_size:window_size + num_windows].copy()
    X_index = signal.timestamps[:num_windows + window_size - 1].copy()
    return WindowedData(X, y, index, X_index)

"""Turn model outputs into one non-negative anomaly score per timestamp."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tsadbench.exceptions import (
    EmptyIntersection, EmptySequence, LengthMismatch, ShapeMismatch)


@dataclass(frozen=True, eq=False)
class ErrorSeries:
    index: np.ndarray
    errors: np.ndarray

    def __post_init__(self):
        index = np.asarray(self.index, dtype=np.int64)
        errors = np.asarray(self.errors, dtype=float)
        if index.shape != errors.shape or index.ndim != 1:
            raise LengthMismatch(f"{index.shape[0]} timestamps for {errors.shape} errors")
        if np.any(errors < 0):
            raise ValueError("errors must be non-negative")
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "errors", errors)

    def __len__(self):
        return self.index.shape[0]


def ewma(values, span: int) -> np.ndarray:
    """``s[0] = v[0]; s[t] = a * v[t] + (1 - a) * s[t-1]`` with ``a = 2 / (span + 1)``."""
    values = np.asarray(values, dtype=float)
    span = int(span)
    if span < 1:
        raise ValueError("span must be >= 1")
    if span == 1 or values.size == 0:
        return values.copy()
    alpha = 2.0 / (span + 1)
    out = np.empty_like(values)
    level = values[0]
    for t, v in enumerate(values):
        level = alpha * v + (1 - alpha) * level
        out[t] = level
    return out


def _channel_mean(diff):
    return diff if diff.ndim == 1 else diff.reshape(diff.shape[0], -1).mean(axis=1)


def regression_errors(y, y_hat, index, smoothing_window: int = 1) -> ErrorSeries:
    """Absolute forecast residual smoothed by an EWMA of span ``smoothing_window``.

    Multi-column targets are reduced by the mean absolute residual per row.
    """
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    index = np.asarray(index)
    if y.shape != y_hat.shape or y.shape[0] != index.shape[0]:
        raise LengthMismatch(f"y {y.shape}, y_hat {y_hat.shape}, index {index.shape}")
    errors = _channel_mean(np.abs(y - y_hat))
    return ErrorSeries(index, ewma(errors, smoothing_window))


def dtw_distance(a, b) -> float:
    """Dynamic time warping with ``|a_i - b_j|`` local cost and steps down/right/diagonal."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise EmptySequence("dtw needs two non-empty sequences")
    cost = np.abs(a[:, None] - b[None, :])
    previous = np.cumsum(cost[0])
    for i in range(1, a.size):
        current = np.empty(b.size)
        current[0] = previous[0] + cost[i, 0]
        for j in range(1, b.size):
            current[j] = cost[i, j] + min(previous[j], previous[j - 1], current[j - 1])
        previous = current
    return float(previous[-1])


def _collapse(windows, n_samples):
    """Mean over every window covering each sample (stride-1 windows)."""
    num_windows, width = windows.shape[:2]
    sums = np.zeros((n_samples,) + windows.shape[2:])
    counts = np.zeros(n_samples)
    for offset in range(width):
        sums[offset:offset + num_windows] += windows[:, offset]
        counts[offset:offset + num_windows] += 1
    return (sums.T / counts).T


def _trapezoid(values):
    # unit sample spacing
    return float(np.sum(values[:-1] + values[1:]) / 2.0)


def _centred_slices(n_samples, window):
    half = window // 2
    for t in range(n_samples):
        lo = max(0, t - half)
        yield t, slice(lo, min(n_samples, t - half + window))


def reconstruction_errors(X, X_hat, index, method: str = "point",
                          window: int = 10) -> ErrorSeries:
    """Per-timestamp discrepancy between windows and their reconstruction.

    ``X`` holds stride-1 windows; ``index`` has one timestamp per covered
    sample (``num_windows + width - 1``). ``point`` averages ``|X - X_hat|``
    over all windows covering a sample. ``area`` and ``dtw`` first collapse
    both window stacks to one value per sample (mean over covering windows),
    then compare a window of length ``window`` centred on each sample by the
    absolute difference of trapezoidal areas, or by DTW distance. Centred
    windows are truncated at the signal edges.
    """
    X = np.asarray(X, dtype=float)
    X_hat = np.asarray(X_hat, dtype=float)
    index = np.asarray(index)
    if X.shape != X_hat.shape or X.ndim < 2:
        raise ShapeMismatch(f"X {X.shape} and X_hat {X_hat.shape} differ")
    n_samples = X.shape[0] + X.shape[1] - 1
    if index.shape[0] != n_samples:
        raise ShapeMismatch(f"index has {index.shape[0]} entries; windows cover {n_samples}")

    if method == "point":
        errors = _channel_mean(_collapse(np.abs(X - X_hat), n_samples))
        return ErrorSeries(index, errors)

    original = _channel_mean(_collapse(X, n_samples))
    rebuilt = _channel_mean(_collapse(X_hat, n_samples))
    window = max(1, int(window))
    errors = np.empty(n_samples)
    if method == "area":
        for t, span in _centred_slices(n_samples, window):
            errors[t] = abs(_trapezoid(original[span]) - _trapezoid(rebuilt[span]))
    elif method == "dtw":
        for t, span in _centred_slices(n_samples, window):
            errors[t] = dtw_distance(original[span], rebuilt[span])
    else:
        raise ValueError(f"unknown reconstruction error method {method!r}")
    return ErrorSeries(index, errors)


def combine_errors_product(error_series) -> ErrorSeries:
    """Element-wise product over the timestamps shared by every input."""
    error_series = list(error_series)
    if not error_series:
        raise EmptyIntersection("nothing to combine")
    common = error_series[0].index
    for series in error_series[1:]:
        common = np.intersect1d(common, series.index)
    if common.size == 0:
        raise EmptyIntersection("the error series share no timestamp")
    product = np.ones(common.size)
    for series in error_series:
        positions = np.searchsorted(series.index, common)
        product *= series.errors[positions]
    return ErrorSeries(common, product)


def product_of_errors(errors_a: ErrorSeries, errors_b: ErrorSeries) -> ErrorSeries:
    return combine_errors_product([errors_a, errors_b])

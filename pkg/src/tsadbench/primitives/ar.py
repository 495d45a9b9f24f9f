"""Autoregressive forecaster with optional differencing (ARIMA without the MA term)."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from tsadbench.core.types import TimeSeries
from tsadbench.exceptions import MultivariateUnsupported, SeriesTooShort

RIDGE = 1e-8


@dataclass(frozen=True)
class ARModel:
    p: int
    d: int
    coefficients: np.ndarray   # lag 1 first
    intercept: float
    ridge: bool = False        # True when the lag matrix was rank deficient


def _as_vector(series):
    if isinstance(series, TimeSeries):
        values = series.values
        if values.shape[1] != 1:
            raise MultivariateUnsupported("AR model expects one channel")
        return values[:, 0]
    values = np.asarray(series, dtype=float)
    if values.ndim != 1:
        raise MultivariateUnsupported("AR model expects a one-dimensional series")
    return values


def _lag_matrix(z, p):
    rows = len(z) - p
    columns = [z[p - k - 1:p - k - 1 + rows] for k in range(p)]
    return np.column_stack(columns + [np.ones(rows)])


def ar_fit(series, p: int = 5, d: int = 0) -> ARModel:
    """Least-squares AR(``p``) fit of the ``d``-times differenced series.

    Falls back to a ridge solve (lambda 1e-8) when the lag matrix is rank
    deficient, e.g. for a constant series.
    """
    p, d = int(p), int(d)
    if p < 1 or d < 0:
        raise ValueError("p must be >= 1 and d >= 0")
    z = np.diff(_as_vector(series), n=d)
    if len(z) < p + 1:
        raise SeriesTooShort(f"{len(z)} samples after differencing; AR({p}) needs {p + 1}")

    A = _lag_matrix(z, p)
    target = z[p:]
    ridge = np.linalg.matrix_rank(A) < A.shape[1]
    if ridge:
        beta = np.linalg.solve(A.T @ A + RIDGE * np.eye(A.shape[1]), A.T @ target)
    else:
        beta, *_ = np.linalg.lstsq(A, target, rcond=None)
    return ARModel(p, d, beta[:p].copy(), float(beta[p]), bool(ridge))


def ar_predict(model: ARModel, series) -> np.ndarray:
    """One-step-ahead forecasts for positions ``p + d .. T - 1``, on the original scale."""
    x = _as_vector(series)
    p, d = model.p, model.d
    count = len(x) - p - d
    if count <= 0:
        return np.empty(0)
    z = np.diff(x, n=d)
    z_hat = _lag_matrix(z, p)[:count] @ np.append(model.coefficients, model.intercept)

    # x_t = diff^d(x)_t - sum_{k=1..d} (-1)^k C(d,k) x_{t-k}
    start = p + d
    x_hat = z_hat.copy()
    for k in range(1, d + 1):
        x_hat -= (-1) ** k * comb(d, k) * x[start - k:start - k + count]
    return x_hat


def ar_forecaster_fit(signal: TimeSeries, p: int = 5, d: int = 0):
    """One model per channel."""
    return tuple(ar_fit(signal.values[:, c], p, d) for c in range(signal.n_channels))


def ar_forecaster_produce(models, signal: TimeSeries):
    """Returns ``(y, y_hat, index)`` for every forecastable position."""
    offset = models[0].p + models[0].d
    y_hat = np.column_stack([ar_predict(m, signal.values[:, c]) for c, m in enumerate(models)])
    y = np.array(signal.values[offset:])
    index = np.array(signal.timestamps[offset:])
    if signal.n_channels == 1:
        y, y_hat = y[:, 0], y_hat[:, 0]
    return y, y_hat, index

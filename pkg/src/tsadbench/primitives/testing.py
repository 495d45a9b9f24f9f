"""Deliberately misbehaving primitives used to exercise the runner and validator."""
import numpy as np

from tsadbench.core.types import TimeSeries


def always_fail(signal: TimeSeries):
    raise RuntimeError("this primitive always fails")


def unseeded_noise(signal: TimeSeries, sigma: float = 1.0):
    # draws from OS entropy on purpose, so two runs never agree
    rng = np.random.default_rng()
    return TimeSeries(signal.timestamps, signal.values + rng.normal(0, sigma, signal.values.shape))

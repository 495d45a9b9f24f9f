"""Seeded sine signals with injected anomalies and exact ground truth."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from tsadbench.core.types import AnomalyInterval, TimeSeries
from tsadbench.data.csvio import format_truth_csv, write_signal_csv
from tsadbench.exceptions import ConfigError

KINDS = ("point_spike", "level_shift", "noise_burst")


def generate_synthetic(config: dict):
    """Build one signal from ``config``; returns ``(series, truth_intervals)``.

    Keys: ``length``, ``period``, ``noise_sigma``, ``anomalies`` (list of
    ``{kind, position, magnitude, width}``), ``seed``, and optionally
    ``amplitude`` (1.0), ``start`` (0) and ``step`` (1). A point spike adds
    ``magnitude`` to one sample, a level shift adds it to ``width`` samples
    and a noise burst adds Gaussian noise with std ``magnitude``.
    """
    try:
        length = int(config["length"])
        period = float(config.get("period", 100))
        sigma = float(config.get("noise_sigma", 0.0))
        seed = int(config.get("seed", 0))
        amplitude = float(config.get("amplitude", 1.0))
        start = int(config.get("start", 0))
        step = int(config.get("step", 1))
        anomalies = list(config.get("anomalies", []))
    except (KeyError, TypeError, ValueError) as error:
        raise ConfigError(f"bad synthetic config: {error}") from None
    if length < 2 or period <= 0 or sigma < 0 or step < 1:
        raise ConfigError("need length >= 2, period > 0, noise_sigma >= 0, step >= 1")

    rng = np.random.default_rng(seed)
    positions = np.arange(length)
    values = amplitude * np.sin(2 * np.pi * positions / period)
    if sigma > 0:
        values = values + rng.normal(0.0, sigma, length)
    timestamps = start + step * positions

    spans = []
    for anomaly in anomalies:
        kind = anomaly.get("kind")
        if kind not in KINDS:
            raise ConfigError(f"unknown anomaly kind {kind!r}")
        position = int(anomaly.get("position", -1))
        width = 1 if kind == "point_spike" else int(anomaly.get("width", 1))
        magnitude = float(anomaly.get("magnitude", 1.0))
        if width < 1 or position < 0 or position + width > length:
            raise ConfigError(f"anomaly {anomaly!r} does not fit in {length} samples")
        spans.append((position, position + width - 1, kind, magnitude))

    spans.sort()
    for (_, prev_end, *_), (next_start, *_) in zip(spans, spans[1:]):
        if next_start <= prev_end:
            raise ConfigError("injected anomalies overlap")

    truth = []
    for first, last, kind, magnitude in spans:
        if kind == "noise_burst":
            values[first:last + 1] += rng.normal(0.0, magnitude, last - first + 1)
        else:
            values[first:last + 1] += magnitude
        truth.append(AnomalyInterval(int(timestamps[first]), int(timestamps[last])))
    return TimeSeries(timestamps, values), truth


def suite_configs(n_signals: int = 20, seed: int = 0, length: int = 1000):
    """Random but seeded configurations: 1-3 spikes or noise bursts per signal."""
    rng = np.random.default_rng(seed)
    configs = []
    for k in range(n_signals):
        n_anomalies = int(rng.integers(1, 4))
        # one anomaly per slot, away from the edges
        slots = np.linspace(0.15 * length, 0.85 * length, n_anomalies + 1)
        anomalies = []
        for a in range(n_anomalies):
            position = int(rng.integers(slots[a], slots[a + 1] - 40))
            if rng.random() < 0.5:
                anomalies.append({"kind": "point_spike", "position": position,
                                  "magnitude": float(rng.choice([-1, 1]) * rng.uniform(1.5, 3.0)),
                                  "width": 1})
            else:
                anomalies.append({"kind": "noise_burst", "position": position,
                                  "magnitude": float(rng.uniform(0.5, 1.0)),
                                  "width": int(rng.integers(10, 30))})
        configs.append({
            "name": f"synthetic-{k:02d}", "length": length,
            "period": float(rng.uniform(40, 120)), "noise_sigma": 0.05,
            "seed": int(rng.integers(2**31)), "anomalies": anomalies,
        })
    return configs


def write_dataset(configs, out_dir, dataset: str = "synthetic") -> Path:
    """Write signals, ``truth.csv`` and a ``datasets.json`` registry into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    truth = {}
    names = []
    for config in configs:
        name = config.get("name")
        if not name:
            raise ConfigError("every synthetic signal config needs a name")
        series, intervals = generate_synthetic(config)
        write_signal_csv(series, out_dir / f"{name}.csv")
        truth[name] = intervals
        names.append(name)
    (out_dir / "truth.csv").write_text(format_truth_csv(truth))
    registry = {"schema": 1, "datasets": [{
        "name": dataset, "signals": names, "source": ".", "truth_file": "truth.csv",
        "train_test_split": "same_signal"}]}
    path = out_dir / "datasets.json"
    path.write_text(json.dumps(registry, indent=2) + "\n")
    return path


def configs_from_document(document: dict):
    """Either an explicit ``signals`` list or a ``suite`` description of random signals."""
    if "signals" in document:
        return list(document["signals"])
    if "suite" in document:
        return suite_configs(**document["suite"])
    raise ConfigError("synthetic config needs 'signals' or 'suite'")

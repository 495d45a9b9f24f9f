"""Runs every pipeline on every signal of every dataset, several times over."""
from __future__ import annotations

import hashlib
import logging
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from tsadbench.benchmark.records import ExperimentRecord
from tsadbench.core.engine import detect, fit
from tsadbench.core.types import normalize_intervals
from tsadbench.data.registry import DatasetRegistry, load_ground_truth, load_signal
from tsadbench.evaluation import METHODS, scores_from_counts, segment_counts
from tsadbench.exceptions import ConfigError

logger = logging.getLogger(__name__)


def experiment_seed(seed: int, pipeline: str, dataset: str, signal: str, iteration: int) -> int:
    key = "\x1f".join([str(seed), pipeline, dataset, signal, str(iteration)])
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little")


@dataclass(frozen=True)
class _Task:
    pipeline: object
    dataset: str
    signal: str
    iteration: int
    seed: int


class _Inputs:
    """Signals and ground truth loaded once up front; failures are kept and
    re-raised inside the experiments that need them."""

    def __init__(self, datasets, registry):
        self.data = {}
        self.truth = {}
        for name in datasets:
            descriptor = registry[name]
            try:
                self.truth[name] = load_ground_truth(name, registry)
            except Exception as error:  # noqa: BLE001 - recorded per experiment
                self.truth[name] = error
            for signal in descriptor.signals:
                self.data[name, signal] = self._load(descriptor, signal, registry)

    @staticmethod
    def _load(descriptor, signal, registry):
        try:
            if descriptor.train_test_split == "pre_split":
                return (load_signal(signal, registry, descriptor.name, "train"),
                        load_signal(signal, registry, descriptor.name, "test"))
            series = load_signal(signal, registry, descriptor.name)
            return series, series
        except Exception as error:  # noqa: BLE001
            return error

    def get(self, dataset, signal):
        for item in (self.data[dataset, signal], self.truth[dataset]):
            if isinstance(item, Exception):
                raise item
        train, test = self.data[dataset, signal]
        return train, test, self.truth[dataset].get(signal, [])


def _experiment(task: _Task, inputs: _Inputs, method: str):
    started = time.perf_counter()
    train, test, truth = inputs.get(task.dataset, task.signal)
    fitted = fit(task.pipeline, train, seed=task.seed)
    detection = detect(fitted, test)
    elapsed = time.perf_counter() - started

    t0, t1 = int(test.timestamps[0]), int(test.timestamps[-1])
    truth = normalize_intervals(truth, t0, t1)
    if method == "weighted":
        counts = segment_counts(detection.intervals, truth, (t0, t1 + test.step),
                                method, test.step)
    else:
        counts = segment_counts(detection.intervals, truth, (t0, t1), method)
    timings = {key: fitted.timings.get(key, 0.0) + detection.timings.get(key, 0.0)
               for key in dict.fromkeys([*fitted.timings, *detection.timings])}
    return counts, elapsed, timings, len(test)


def _record(task, inputs, method, run_id, reproducible):
    try:
        counts, elapsed, timings, length = _experiment(task, inputs, method)
    except Exception as error:  # noqa: BLE001 - a failed experiment never aborts the run
        logger.warning("%s on %s/%s (iteration %d) failed: %s", task.pipeline.name,
                       task.dataset, task.signal, task.iteration, error)
        return ExperimentRecord(task.dataset, task.pipeline.name, task.signal, task.iteration,
                                status="ERROR", run_id=run_id, error=str(error))
    scores = scores_from_counts(counts)
    if reproducible:
        elapsed = 0.0
        timings = {key: 0.0 for key in timings}
    return ExperimentRecord(
        task.dataset, task.pipeline.name, task.signal, task.iteration,
        f1=scores.f1, precision=scores.precision, recall=scores.recall,
        tn=counts.tn, fp=counts.fp, fn=counts.fn, tp=counts.tp,
        status="OK", elapsed=elapsed, run_id=run_id, timings=timings, length=length)


def run_benchmark(pipelines, datasets, metric_method: str = "overlapping",
                  iterations: int = 5, seed: int = 0, workers: int = 1,
                  registry: DatasetRegistry | None = None,
                  reproducible: bool = False) -> list[ExperimentRecord]:
    """One record per (pipeline, signal, iteration), sorted by
    ``(pipeline, dataset, signal, iteration)``.

    ``pipelines`` are :class:`PipelineSpec` objects and ``datasets`` names in
    ``registry``. Experiments run on a pool of ``workers`` threads; each gets
    its own seed derived from ``seed`` and its coordinates, so results do not
    depend on scheduling. With ``reproducible`` the run id is ``"0"`` and all
    wall times are zero, which makes the output byte-stable.
    """
    if metric_method not in METHODS:
        raise ConfigError(f"unknown metric method {metric_method!r}; expected one of {METHODS}")
    if iterations < 1:
        raise ConfigError("iterations must be at least 1")
    if workers < 1:
        raise ConfigError("workers must be at least 1")
    registry = registry or DatasetRegistry.from_file()
    pipelines = list(pipelines)
    names = [p.name for p in pipelines]
    if len(set(names)) != len(names):
        raise ConfigError("pipeline names must be unique")
    datasets = list(dict.fromkeys(datasets))
    for name in datasets:
        registry[name]

    run_id = "0" if reproducible else str(uuid.uuid4())
    inputs = _Inputs(datasets, registry)
    tasks = [
        _Task(pipeline, dataset, signal, iteration,
              experiment_seed(seed, pipeline.name, dataset, signal, iteration))
        for pipeline in pipelines
        for dataset in datasets
        for signal in registry[dataset].signals
        for iteration in range(iterations)
    ]

    def work(task):
        return _record(task, inputs, metric_method, run_id, reproducible)

    if workers == 1:
        records = [work(task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(work, tasks))
    return sorted(records, key=lambda r: r.sort_key)

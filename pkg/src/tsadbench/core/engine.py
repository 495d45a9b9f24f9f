"""Runs a :class:`PipelineSpec` over a signal: the ``fit`` / ``detect`` contract.

Primitives are plain functions named by dotted path in their JSON spec.
Transformers are called as ``produce(**inputs, **hyperparameters)``.
Estimators are called as ``fit(**inputs, **hyperparameters) -> state`` and
``produce(state, **inputs, **hyperparameters)``. Only the hyperparameters a
function's signature accepts are passed; a function that declares an ``rng``
parameter receives a :class:`numpy.random.Generator` seeded from the global
seed combined with the step's position in the pipeline.
"""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, NamedTuple

import numpy as np

from tsadbench.core.specs import (
    ENTRY_KEYS, OUTPUT_KEY, PipelineSpec, accepted_arguments, import_callable,
    resolve_hyperparameters)
from tsadbench.core.types import AnomalyInterval, TimeSeries, normalize_intervals
from tsadbench.exceptions import PrimitiveError, SeriesTooShort

MIN_LENGTH = 2


def _name_entropy(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "little")


def step_seed(seed: int, pipeline_name: str, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed & (2**64 - 1), _name_entropy(pipeline_name), index])


class ExecutionContext:
    """Symbolic key -> value store where every key is written exactly once."""

    def __init__(self, rng_seed: int, **entries):
        self.rng_seed = rng_seed
        self._store = {}
        for key, value in entries.items():
            self[key] = value

    def __setitem__(self, key, value):
        if key in self._store:
            raise RuntimeError(f"context key {key!r} written twice")
        self._store[key] = value

    def __getitem__(self, key):
        return self._store[key]

    def __contains__(self, key):
        return key in self._store

    def keys(self):
        return self._store.keys()


@dataclass(frozen=True)
class FittedPipeline:
    """Immutable result of :func:`fit`; safe to share between threads."""

    spec: PipelineSpec
    seed: int
    states: Mapping            # step key -> fitted state, estimators only
    hyperparameters: Mapping   # step key -> hyperparameters resolved at fit time
    timings: Mapping           # step key -> seconds spent during fit


class Detection(NamedTuple):
    intervals: list
    timings: dict


def _call(function, leading, arguments, hyperparameters, rng):
    accepted = accepted_arguments(function)
    kwargs = dict(arguments)
    for name, value in hyperparameters.items():
        if accepted is None or name in accepted:
            kwargs[name] = value
    if accepted is not None and "rng" in accepted:
        kwargs["rng"] = rng
    return function(*leading, **kwargs)


def _store_outputs(context, step, result):
    declared = list(step.outputs)
    if len(declared) == 1:
        values = [result]
    elif isinstance(result, tuple):
        if len(result) != len(declared):
            raise ValueError(f"returned {len(result)} values for outputs {declared}")
        values = list(result)
    else:
        values = [getattr(result, name) for name in declared]
    for name, value in zip(declared, values):
        context[step.outputs[name]] = value


def _run(spec, context, hyperparameters, states, stage, seed):
    timings = {}
    for index, step in enumerate(spec.steps):
        primitive = step.primitive
        rng = np.random.default_rng(step_seed(seed, spec.name, index))
        arguments = {name: context[key] for name, key in step.inputs.items()}
        hyper = hyperparameters[step.key]
        started = time.perf_counter()
        try:
            if primitive.kind == "estimator":
                if stage == "fit":
                    states[step.key] = _call(import_callable(primitive.fit_method),
                                             (), arguments, hyper, rng)
                leading = (states[step.key],)
            else:
                leading = ()
            result = _call(import_callable(primitive.produce_method),
                           leading, arguments, hyper, rng)
            _store_outputs(context, step, result)
        except Exception as error:
            raise PrimitiveError(step.key, stage, f"{type(error).__name__}: {error}") from error
        finally:
            timings[step.key] = timings.get(step.key, 0.0) + time.perf_counter() - started
    return timings


def _check_input(series, what):
    if not isinstance(series, TimeSeries):
        raise TypeError(f"{what} must be a TimeSeries")
    if len(series) < MIN_LENGTH:
        raise SeriesTooShort(f"{what} has {len(series)} samples; at least {MIN_LENGTH} needed")


def fit(pipeline: PipelineSpec, train: TimeSeries, seed: int = 0) -> FittedPipeline:
    """Run every primitive on ``train`` in order, fitting estimators on the way."""
    _check_input(train, "training signal")
    hyperparameters = resolve_hyperparameters(pipeline, len(train))
    context = ExecutionContext(seed, **{ENTRY_KEYS[0]: train})
    states = {}
    timings = _run(pipeline, context, hyperparameters, states, "fit", seed)
    return FittedPipeline(
        spec=pipeline, seed=seed,
        states=MappingProxyType(states),
        hyperparameters=MappingProxyType(
            {k: MappingProxyType(v) for k, v in hyperparameters.items()}),
        timings=MappingProxyType(timings))


def detect(fitted: FittedPipeline, test: TimeSeries) -> Detection:
    """Anomalous intervals of ``test`` plus wall time per primitive.

    Transformers re-resolve dynamic hyperparameters against the test length;
    estimators keep the values they were fitted with.
    """
    _check_input(test, "test signal")
    spec = fitted.spec
    hyperparameters = resolve_hyperparameters(spec, len(test))
    for step in spec.steps:
        if step.primitive.kind == "estimator":
            hyperparameters[step.key] = dict(fitted.hyperparameters[step.key])

    context = ExecutionContext(fitted.seed, **{ENTRY_KEYS[0]: test})
    timings = _run(spec, context, hyperparameters, dict(fitted.states), "detect", fitted.seed)

    raw = context[OUTPUT_KEY]
    if not all(isinstance(i, AnomalyInterval) for i in raw):
        raise PrimitiveError(spec.steps[-1].key, "detect", "output is not a list of intervals")
    intervals = normalize_intervals(raw, int(test.timestamps[0]), int(test.timestamps[-1]))
    return Detection(intervals, timings)

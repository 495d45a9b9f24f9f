"""JSON documents describing primitives and the pipelines built from them."""
from __future__ import annotations

import importlib
import inspect
import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from types import MappingProxyType
from typing import Callable, Mapping

from tsadbench.core.hyperparameters import check_value, resolve_value
from tsadbench.exceptions import (
    BadOverride, DanglingInput, DataFlowError, SchemaError, UnknownPrimitive)

SCHEMA_VERSION = 1
ENTRY_KEYS = ("signal",)
OUTPUT_KEY = "anomalies"
RESOURCES = Path(__file__).resolve().parent.parent / "resources"

_IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")
_PRIMITIVE_FIELDS = {
    "schema", "name", "description", "kind", "fit_method", "produce_method",
    "inputs", "outputs", "fixed_hyperparameters", "tunable_hyperparameters",
}
_PIPELINE_FIELDS = {
    "schema", "name", "description", "status", "primitives", "init",
    "input_names", "output_names",
}


def _parse_json(text, what):
    try:
        document = json.loads(text)
    except json.JSONDecodeError as error:
        raise SchemaError(what, f"invalid JSON: {error}") from None
    if not isinstance(document, dict):
        raise SchemaError(what, "document must be a JSON object")
    schema = document.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise SchemaError("schema", f"unsupported schema version {schema!r}")
    return document


def _identifier(document, key, required=True):
    value = document.get(key)
    if value is None and not required:
        return None
    if not isinstance(value, str) or not _IDENTIFIER.match(value):
        raise SchemaError(key, f"expected an identifier, got {value!r}")
    return value


def _names(document, key):
    value = document.get(key, [])
    if not isinstance(value, list) or not all(isinstance(v, str) and v for v in value):
        raise SchemaError(key, "must be a list of non-empty strings")
    if len(set(value)) != len(value):
        raise SchemaError(key, "names must be unique")
    return tuple(value)


@dataclass(frozen=True)
class PrimitiveSpec:
    name: str
    kind: str
    produce_method: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    fit_method: str | None = None
    fixed_hyperparameters: Mapping = field(default_factory=dict)
    # name -> (type, default)
    tunable_hyperparameters: Mapping = field(default_factory=dict)
    description: str = ""

    @property
    def hyperparameter_types(self):
        return {name: type_ for name, (type_, _) in self.tunable_hyperparameters.items()}

    def defaults(self):
        values = dict(self.fixed_hyperparameters)
        values.update({name: default
                       for name, (_, default) in self.tunable_hyperparameters.items()})
        return values


def load_primitive_spec(json_text: str) -> PrimitiveSpec:
    """Parse and validate one primitive document.

    Raises :class:`SchemaError` naming the offending field, or
    :class:`TypeMismatch` when a declared default does not match its type.
    """
    document = _parse_json(json_text, "primitive")
    unknown = set(document) - _PRIMITIVE_FIELDS
    if unknown:
        raise SchemaError(sorted(unknown)[0], "unknown field")

    name = _identifier(document, "name")
    kind = document.get("kind")
    if kind not in ("transformer", "estimator"):
        raise SchemaError("kind", f"must be 'transformer' or 'estimator', got {kind!r}")
    produce_method = _identifier(document, "produce_method")
    fit_method = _identifier(document, "fit_method", required=False)
    if kind == "estimator" and fit_method is None:
        raise SchemaError("fit_method", "estimators must declare a fit_method")
    if kind == "transformer" and fit_method is not None:
        raise SchemaError("fit_method", "transformers cannot declare a fit_method")

    inputs = _names(document, "inputs")
    outputs = _names(document, "outputs")
    if not outputs:
        raise SchemaError("outputs", "a primitive must produce at least one key")
    if set(inputs) & set(outputs):
        raise SchemaError("outputs", "a primitive cannot overwrite one of its inputs")

    fixed = document.get("fixed_hyperparameters", {})
    if not isinstance(fixed, dict):
        raise SchemaError("fixed_hyperparameters", "must be an object")
    tunable_doc = document.get("tunable_hyperparameters", {})
    if not isinstance(tunable_doc, dict):
        raise SchemaError("tunable_hyperparameters", "must be an object")

    tunable = {}
    for hp_name, declaration in tunable_doc.items():
        where = f"tunable_hyperparameters.{hp_name}"
        if hp_name in fixed:
            raise SchemaError(where, "declared both fixed and tunable")
        if not isinstance(declaration, dict) or "type" not in declaration:
            raise SchemaError(where, "needs a 'type'")
        if set(declaration) - {"type", "default", "description"}:
            raise SchemaError(where, "unknown keys in declaration")
        type_name = declaration["type"]
        tunable[hp_name] = (type_name, check_value(where, type_name, declaration.get("default")))

    return PrimitiveSpec(
        name=name, kind=kind, produce_method=produce_method, fit_method=fit_method,
        inputs=inputs, outputs=outputs,
        fixed_hyperparameters=MappingProxyType(dict(fixed)),
        tunable_hyperparameters=MappingProxyType(tunable),
        description=document.get("description", ""),
    )


@lru_cache(maxsize=None)
def import_callable(path: str) -> Callable:
    module_name, _, attribute = path.rpartition(".")
    try:
        module = importlib.import_module(module_name)
        function = getattr(module, attribute)
    except (ImportError, AttributeError, ValueError) as error:
        raise UnknownPrimitive(f"cannot import {path!r}: {error}") from None
    if not callable(function):
        raise UnknownPrimitive(f"{path!r} is not callable")
    return function


class PrimitiveRegistry:
    """Name -> :class:`PrimitiveSpec` lookup, loaded from directories of JSON files."""

    def __init__(self, specs=()):
        self._specs = {}
        for spec in specs:
            self.add(spec)

    def add(self, spec: PrimitiveSpec):
        self._specs[spec.name] = spec

    def load_directory(self, directory):
        for path in sorted(Path(directory).glob("*.json")):
            try:
                self.add(load_primitive_spec(path.read_text()))
            except SchemaError as error:
                raise SchemaError(f"{path.name}:{error.field}", str(error)) from None
        return self

    @classmethod
    def default(cls, extra_dirs=()):
        registry = cls().load_directory(RESOURCES / "primitives")
        for directory in extra_dirs:
            registry.load_directory(directory)
        return registry

    def __contains__(self, name):
        return name in self._specs

    def __getitem__(self, name):
        try:
            return self._specs[name]
        except KeyError:
            raise UnknownPrimitive(f"unknown primitive {name!r}") from None

    def names(self):
        return sorted(self._specs)


@dataclass(frozen=True)
class Step:
    """One primitive occurrence inside a pipeline, with its wiring resolved."""

    key: str                      # "name", or "name#k" for the k-th repeat
    primitive: PrimitiveSpec
    hyperparameters: Mapping      # merged defaults + init; may hold dynamic values
    inputs: Mapping               # declared input name -> context key
    outputs: Mapping              # declared output name -> context key


@dataclass(frozen=True)
class PipelineSpec:
    name: str
    status: str
    primitives: tuple[str, ...]
    init: Mapping
    steps: tuple[Step, ...]
    description: str = ""

    @property
    def estimator_keys(self):
        return [s.key for s in self.steps if s.primitive.kind == "estimator"]


def _step_keys(names):
    seen = {}
    keys = []
    for name in names:
        seen[name] = seen.get(name, 0) + 1
        keys.append(name if seen[name] == 1 else f"{name}#{seen[name]}")
    return keys


def _wiring(document, field_name, keys):
    wiring = document.get(field_name, {})
    if not isinstance(wiring, dict):
        raise SchemaError(field_name, "must be an object keyed by primitive")
    for key, mapping in wiring.items():
        if key not in keys:
            raise BadOverride(f"{field_name}: {key!r} is not a primitive of this pipeline")
        if not isinstance(mapping, dict) or not all(
                isinstance(v, str) and v for v in mapping.values()):
            raise SchemaError(f"{field_name}.{key}", "must map names to context keys")
    return wiring


def load_pipeline_spec(json_text: str, registry: PrimitiveRegistry) -> PipelineSpec:
    """Parse a pipeline document, merge ``init`` overrides and check data flow.

    Raises :class:`UnknownPrimitive`, :class:`DanglingInput` when a primitive
    consumes a key nobody produced earlier, and :class:`BadOverride` when
    ``init`` names something that is not a tunable hyperparameter.
    """
    document = _parse_json(json_text, "pipeline")
    unknown = set(document) - _PIPELINE_FIELDS
    if unknown:
        raise SchemaError(sorted(unknown)[0], "unknown field")

    name = _identifier(document, "name")
    status = document.get("status", "sandbox")
    if status not in ("sandbox", "verified"):
        raise SchemaError("status", f"must be 'sandbox' or 'verified', got {status!r}")
    names = document.get("primitives")
    if not isinstance(names, list) or not names or not all(isinstance(n, str) for n in names):
        raise SchemaError("primitives", "must be a non-empty list of primitive names")

    primitives = [registry[n] for n in names]
    keys = _step_keys(names)

    init = document.get("init", {})
    if not isinstance(init, dict):
        raise SchemaError("init", "must be an object keyed by primitive")
    for key, overrides in init.items():
        if key not in keys:
            raise BadOverride(f"init: {key!r} is not a primitive of this pipeline")
        if not isinstance(overrides, dict):
            raise SchemaError(f"init.{key}", "must be an object")
    input_names = _wiring(document, "input_names", keys)
    output_names = _wiring(document, "output_names", keys)

    available = set(ENTRY_KEYS)
    steps = []
    for key, primitive in zip(keys, primitives):
        hyperparameters = primitive.defaults()
        types = primitive.hyperparameter_types
        for hp_name, value in init.get(key, {}).items():
            if hp_name not in types:
                raise BadOverride(
                    f"init.{key}: {hp_name!r} is not a tunable hyperparameter of "
                    f"{primitive.name!r}")
            hyperparameters[hp_name] = check_value(
                f"init.{key}.{hp_name}", types[hp_name], value)

        in_map = {n: input_names.get(key, {}).get(n, n) for n in primitive.inputs}
        out_map = {n: output_names.get(key, {}).get(n, n) for n in primitive.outputs}
        for declared in set(input_names.get(key, {})) - set(primitive.inputs):
            raise BadOverride(f"input_names.{key}: {declared!r} is not an input")
        for declared in set(output_names.get(key, {})) - set(primitive.outputs):
            raise BadOverride(f"output_names.{key}: {declared!r} is not an output")

        for declared, context_key in in_map.items():
            if context_key not in available:
                raise DanglingInput(
                    f"{key!r} consumes {context_key!r} before any primitive produces it")
        for context_key in out_map.values():
            if context_key in available:
                raise DataFlowError(f"{key!r} would overwrite {context_key!r}")
            available.add(context_key)

        steps.append(Step(key, primitive, MappingProxyType(hyperparameters),
                          MappingProxyType(in_map), MappingProxyType(out_map)))

    if OUTPUT_KEY not in available:
        raise DataFlowError(f"no primitive produces {OUTPUT_KEY!r}")

    return PipelineSpec(
        name=name, status=status, primitives=tuple(names),
        init=MappingProxyType({k: dict(v) for k, v in init.items()}),
        steps=tuple(steps), description=document.get("description", ""))


def load_pipeline_file(path, registry: PrimitiveRegistry) -> PipelineSpec:
    return load_pipeline_spec(Path(path).read_text(), registry)


def resolve_hyperparameters(spec: PipelineSpec, signal_length: int) -> dict:
    """Concrete hyperparameters per step for a signal of ``signal_length`` samples."""
    if signal_length < 1:
        raise ValueError("signal_length must be >= 1")
    return {
        step.key: {name: resolve_value(value, signal_length)
                   for name, value in step.hyperparameters.items()}
        for step in spec.steps
    }


def accepted_arguments(function):
    parameters = inspect.signature(function).parameters.values()
    if any(p.kind is inspect.Parameter.VAR_KEYWORD for p in parameters):
        return None
    return {p.name for p in parameters}


def pipeline_paths(status=None, extra_dirs=()):
    """JSON files of the bundled pipelines, optionally filtered by status folder."""
    folders = ["verified", "sandbox"] if status is None else [status]
    paths = []
    for folder in folders:
        paths.extend(sorted((RESOURCES / "pipelines" / folder).glob("*.json")))
    for directory in extra_dirs:
        paths.extend(sorted(Path(directory).glob("*.json")))
    return paths


def load_pipelines(registry, status=None, extra_dirs=()):
    """Bundled pipelines keyed by name."""
    pipelines = {}
    for path in pipeline_paths(status, extra_dirs):
        spec = load_pipeline_file(path, registry)
        pipelines[spec.name] = spec
    return pipelines

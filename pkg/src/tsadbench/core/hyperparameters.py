"""Literal and signal-length-relative ("dynamic") hyperparameter values."""
from __future__ import annotations

import math

from tsadbench.exceptions import TypeMismatch

TYPES = {
    "int": (int,),
    "float": (int, float),
    "str": (str,),
    "bool": (bool,),
    "list": (list,),
    "dict": (dict,),
}


def is_dynamic(value) -> bool:
    return isinstance(value, dict) and "fraction_of" in value


def resolve_fraction(fraction: float, length: int) -> int:
    """``max(1, round(fraction * length))`` with halves rounded up."""
    return max(1, int(math.floor(fraction * length + 0.5)))


def check_value(name: str, type_name: str, value):
    """Validate ``value`` against a declared type and return it normalized.

    ``None`` is accepted for every type and means "let the primitive decide".
    """
    if type_name not in TYPES:
        raise TypeMismatch(name, f"unknown hyperparameter type {type_name!r}")
    if value is None:
        return None

    if is_dynamic(value):
        if type_name != "int":
            raise TypeMismatch(name, "only int hyperparameters may be dynamic")
        if set(value) != {"fraction_of", "fraction"}:
            raise TypeMismatch(name, "dynamic value needs exactly 'fraction_of' and 'fraction'")
        if value["fraction_of"] != "signal_length":
            raise TypeMismatch(name, f"cannot take a fraction of {value['fraction_of']!r}")
        fraction = value["fraction"]
        if isinstance(fraction, bool) or not isinstance(fraction, (int, float)) \
                or not 0 < fraction <= 1:
            raise TypeMismatch(name, "dynamic fraction must be a real in (0, 1]")
        return {"fraction_of": "signal_length", "fraction": float(fraction)}

    # bool is an int subclass; keep the two apart
    if isinstance(value, bool) and type_name != "bool":
        raise TypeMismatch(name, f"expected {type_name}, got bool")
    if not isinstance(value, TYPES[type_name]):
        raise TypeMismatch(name, f"expected {type_name}, got {type(value).__name__}")
    if type_name == "float":
        return float(value)
    return value


def resolve_value(value, signal_length: int):
    if is_dynamic(value):
        return resolve_fraction(value["fraction"], signal_length)
    return value

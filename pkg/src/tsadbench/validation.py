"""Checks a pipeline must pass before it can be trusted as ``verified``."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from tsadbench.core.engine import detect, fit
from tsadbench.core.specs import PrimitiveRegistry, load_pipeline_spec
from tsadbench.data.synthetic import generate_synthetic
from tsadbench.exceptions import DataFlowError, TsadbenchError

CHECKS = ("schema", "data-flow", "execution", "determinism")
VALIDATION_SEED = 7

# a short noisy sine with one spike and one burst
VALIDATION_SIGNAL = {
    "length": 600, "period": 50, "noise_sigma": 0.05, "seed": 11,
    "anomalies": [
        {"kind": "point_spike", "position": 200, "magnitude": 3.0},
        {"kind": "noise_burst", "position": 420, "magnitude": 0.8, "width": 20},
    ],
}


@dataclass(frozen=True)
class CheckResult:
    check: str
    status: str          # PASS, FAIL or SKIP
    detail: str = ""

    def __str__(self):
        text = f"{self.status} {self.check}"
        return f"{text}: {self.detail}" if self.detail else text


def _signature(detection):
    return [(i.start, i.end, i.severity) for i in detection.intervals]


def validate_pipeline(path, registry: PrimitiveRegistry | None = None) -> list[CheckResult]:
    """Run every check in order; a failed check skips the ones after it."""
    registry = registry or PrimitiveRegistry.default()
    results = []

    def skip_rest():
        done = {r.check for r in results}
        results.extend(CheckResult(c, "SKIP") for c in CHECKS if c not in done)
        return results

    try:
        text = Path(path).read_text()
        json.loads(text)
    except (OSError, json.JSONDecodeError) as error:
        results.append(CheckResult("schema", "FAIL", str(error)))
        return skip_rest()

    try:
        spec = load_pipeline_spec(text, registry)
    except DataFlowError as error:
        results.append(CheckResult("schema", "PASS"))
        results.append(CheckResult("data-flow", "FAIL", str(error)))
        return skip_rest()
    except TsadbenchError as error:
        results.append(CheckResult("schema", "FAIL", str(error)))
        return skip_rest()
    results.append(CheckResult("schema", "PASS"))
    results.append(CheckResult("data-flow", "PASS"))

    series, _ = generate_synthetic(VALIDATION_SIGNAL)
    try:
        first = detect(fit(spec, series, seed=VALIDATION_SEED), series)
    except Exception as error:  # noqa: BLE001 - any failure fails the check
        results.append(CheckResult("execution", "FAIL", f"{type(error).__name__}: {error}"))
        return skip_rest()
    results.append(CheckResult("execution", "PASS",
                               f"{len(first.intervals)} interval(s) detected"))

    try:
        second = detect(fit(spec, series, seed=VALIDATION_SEED), series)
    except Exception as error:  # noqa: BLE001
        results.append(CheckResult("determinism", "FAIL", f"second run raised {error}"))
        return results
    if _signature(first) == _signature(second):
        results.append(CheckResult("determinism", "PASS"))
    else:
        results.append(CheckResult("determinism", "FAIL",
                                   "two runs with the same seed disagree"))
    return results


def passed(results) -> bool:
    return all(r.status == "PASS" for r in results)

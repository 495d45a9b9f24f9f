"""Client for black-box detectors reachable over HTTP.

Wire format: ``POST {"timestamps": [...], "values": [...]}`` answered by
``{"intervals": [{"start": int, "end": int, "severity": float?}, ...]}``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import requests

from tsadbench.core.types import AnomalyInterval, TimeSeries
from tsadbench.exceptions import BadResponse, ConfigError, HttpStatus, RemoteError, RemoteTimeout

logger = logging.getLogger(__name__)

MAX_RETRIES = 5


@dataclass(frozen=True)
class RemoteDetectorConfig:
    endpoint: str
    timeout: float = 10.0
    retries: int = 0
    token: str | None = None

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")
        if not 0 <= self.retries <= MAX_RETRIES:
            raise ValueError(f"retries must be within 0..{MAX_RETRIES}")


def _payload(series: TimeSeries):
    def clean(v):
        return None if math.isnan(v) else float(v)

    if series.n_channels == 1:
        values = [clean(v) for v in series.values[:, 0]]
    else:
        values = [[clean(v) for v in row] for row in series.values]
    return {"timestamps": [int(t) for t in series.timestamps], "values": values}


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def parse_intervals(document) -> list[AnomalyInterval]:
    """Validate a response body; raises :class:`BadResponse` on any violation."""
    if not isinstance(document, dict) or not isinstance(document.get("intervals"), list):
        raise BadResponse("response must be an object with an 'intervals' list")
    intervals = []
    for item in document["intervals"]:
        if not isinstance(item, dict) or not _is_int(item.get("start")) \
                or not _is_int(item.get("end")):
            raise BadResponse(f"interval {item!r} needs integer 'start' and 'end'")
        if item["start"] > item["end"]:
            raise BadResponse(f"interval {item!r} has start > end")
        severity = item.get("severity")
        if severity is not None and (isinstance(severity, bool)
                                     or not isinstance(severity, (int, float))):
            raise BadResponse(f"interval {item!r} has a non-numeric severity")
        intervals.append(AnomalyInterval(item["start"], item["end"],
                                         None if severity is None else float(severity)))
    intervals.sort()
    for previous, current in zip(intervals, intervals[1:]):
        if current.start <= previous.end:
            raise BadResponse(f"intervals {previous} and {current} overlap")
    return intervals


def remote_detect(config: RemoteDetectorConfig, series: TimeSeries) -> list[AnomalyInterval]:
    headers = {"Accept": "application/json"}
    if config.token:
        headers["Authorization"] = f"Bearer {config.token}"
    payload = _payload(series)

    last_error = None
    for attempt in range(config.retries + 1):
        try:
            response = requests.post(config.endpoint, json=payload, headers=headers,
                                     timeout=config.timeout)
            break
        except requests.RequestException as error:
            last_error = error
        logger.warning("remote detector attempt %d/%d failed: %s",
                       attempt + 1, config.retries + 1, last_error)
    else:
        if isinstance(last_error, requests.Timeout):
            raise RemoteTimeout(f"{config.endpoint} timed out after "
                                f"{config.retries + 1} attempt(s)") from last_error
        raise RemoteError(f"{config.endpoint} unreachable: {last_error}") from last_error

    if not 200 <= response.status_code < 300:
        raise HttpStatus(response.status_code, response.text)
    try:
        document = response.json()
    except ValueError as error:
        raise BadResponse(f"response is not JSON: {error}") from None
    return parse_intervals(document)


def remote_detector_produce(signal: TimeSeries, endpoint: str, timeout: float = 10.0,
                            retries: int = 0, token: str | None = None):
    if not endpoint:
        raise ConfigError("remote_detector needs an endpoint; set it through init")
    config = RemoteDetectorConfig(endpoint, timeout, retries, token)
    return remote_detect(config, signal)

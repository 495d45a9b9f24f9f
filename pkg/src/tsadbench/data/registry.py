"""Dataset registry with a write-once local cache for remotely hosted signals.

A registry is a JSON document::

    {"schema": 1,
     "datasets": [{"name": "...", "signals": ["..."], "source": "<url prefix or dir>",
                   "truth_file": "truth.csv", "train_test_split": "same_signal"}]}

Local ``source`` and ``truth_file`` paths are relative to the registry file.
Signals live at ``<source>/<signal>.csv``; pre-split datasets use
``<signal>-train.csv`` and ``<signal>-test.csv``. Remote files are cached
under ``$TSADBENCH_CACHE`` (default ``./.cache/signals``) as
``<dataset>/<file>``.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import requests
from filelock import FileLock

from tsadbench.core.specs import RESOURCES
from tsadbench.data.csvio import parse_signal_csv, parse_truth_csv
from tsadbench.exceptions import ConfigError, FetchFailed, NotRegistered

logger = logging.getLogger(__name__)

SPLITS = ("same_signal", "pre_split")
DEFAULT_REGISTRY = RESOURCES / "datasets.json"
FETCH_TIMEOUT = 60


def cache_root() -> Path:
    return Path(os.environ.get("TSADBENCH_CACHE", Path(".cache") / "signals"))


def _is_url(location: str) -> bool:
    return location.startswith(("http://", "https://"))


@dataclass(frozen=True)
class DatasetDescriptor:
    name: str
    signals: tuple[str, ...]
    source: str | None
    truth_file: str | None
    train_test_split: str = "same_signal"
    homepage: str | None = None
    base_dir: Path = field(default=Path("."), compare=False)

    @property
    def remote(self) -> bool:
        return self.source is not None and _is_url(self.source)

    def locate(self, filename: str) -> str:
        """URL or local path of ``filename`` inside the dataset source."""
        if self.source is None:
            raise ConfigError(f"dataset {self.name!r} has no source to load from")
        if self.remote:
            return self.source.rstrip("/") + "/" + filename
        return str((self.base_dir / self.source / filename).resolve())

    def truth_location(self) -> str:
        if self.truth_file is None:
            raise ConfigError(f"dataset {self.name!r} declares no truth_file")
        if _is_url(self.truth_file):
            return self.truth_file
        if self.remote:
            return self.locate(self.truth_file)
        return str((self.base_dir / self.truth_file).resolve())


def _descriptor(entry, base_dir):
    if not isinstance(entry, dict) or "name" not in entry:
        raise ConfigError(f"dataset entry {entry!r} needs a name")
    split = entry.get("train_test_split", "same_signal")
    if split not in SPLITS:
        raise ConfigError(f"dataset {entry['name']!r}: unknown split {split!r}")
    signals = entry.get("signals", [])
    if not isinstance(signals, list) or not all(isinstance(s, str) for s in signals):
        raise ConfigError(f"dataset {entry['name']!r}: signals must be a list of names")
    return DatasetDescriptor(
        name=entry["name"], signals=tuple(signals), source=entry.get("source"),
        truth_file=entry.get("truth_file"), train_test_split=split,
        homepage=entry.get("homepage"), base_dir=Path(base_dir))


class DatasetRegistry:
    def __init__(self, descriptors=()):
        self.datasets = {d.name: d for d in descriptors}

    @classmethod
    def from_file(cls, path=None) -> DatasetRegistry:
        path = Path(path) if path else DEFAULT_REGISTRY
        try:
            document = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as error:
            raise ConfigError(f"cannot read dataset registry {path}: {error}") from None
        entries = document.get("datasets") if isinstance(document, dict) else None
        if not isinstance(entries, list):
            raise ConfigError(f"{path}: expected an object with a 'datasets' list")
        return cls(_descriptor(entry, path.parent) for entry in entries)

    def __getitem__(self, name) -> DatasetDescriptor:
        try:
            return self.datasets[name]
        except KeyError:
            raise NotRegistered(f"dataset {name!r} is not registered") from None

    def __contains__(self, name):
        return name in self.datasets

    def names(self):
        return list(self.datasets)

    def find_signal(self, signal) -> DatasetDescriptor:
        for descriptor in self.datasets.values():
            if signal in descriptor.signals:
                return descriptor
        raise NotRegistered(f"signal {signal!r} is not registered")


def _fetch(url: str, target: Path) -> None:
    target.parent.mkdir(parents=True, exist_ok=True)
    with FileLock(str(target) + ".lock"):
        if target.exists():
            return
        logger.info("fetching %s", url)
        try:
            response = requests.get(url, timeout=FETCH_TIMEOUT)
        except requests.RequestException as error:
            raise FetchFailed(url, error) from None
        if response.status_code != 200:
            raise FetchFailed(url, f"HTTP {response.status_code}")
        partial = target.with_name(target.name + ".part")
        partial.write_bytes(response.content)
        os.replace(partial, target)


def _read(descriptor: DatasetDescriptor, filename: str) -> str:
    location = descriptor.locate(filename)
    if not descriptor.remote:
        return Path(location).read_text()
    cached = cache_root() / descriptor.name / filename
    if not cached.exists():
        _fetch(location, cached)
    return cached.read_text()


def signal_filename(name: str, part: str | None = None) -> str:
    return f"{name}.csv" if part is None else f"{name}-{part}.csv"


def load_signal(name: str, registry: DatasetRegistry, dataset: str | None = None,
                part: str | None = None):
    """Read a signal, fetching it into the cache first when it is hosted remotely.

    ``part`` selects ``"train"`` or ``"test"`` for pre-split datasets.
    """
    descriptor = registry[dataset] if dataset else registry.find_signal(name)
    if name not in descriptor.signals:
        raise NotRegistered(f"signal {name!r} is not part of dataset {descriptor.name!r}")
    return parse_signal_csv(_read(descriptor, signal_filename(name, part)))


def load_ground_truth(dataset: str, registry: DatasetRegistry):
    """Signal -> sorted, disjoint list of true anomalous intervals."""
    descriptor = registry[dataset]
    location = descriptor.truth_location()
    if _is_url(location):
        cached = cache_root() / descriptor.name / Path(location).name
        if not cached.exists():
            _fetch(location, cached)
        text = cached.read_text()
    else:
        text = Path(location).read_text()
    return parse_truth_csv(text, descriptor.signals)


def fetch_dataset(dataset: str, registry: DatasetRegistry) -> list[Path]:
    """Make every file of a remote dataset available in the cache."""
    descriptor = registry[dataset]
    if not descriptor.remote:
        return []
    parts = [None] if descriptor.train_test_split == "same_signal" else ["train", "test"]
    fetched = []
    for signal in descriptor.signals:
        for part in parts:
            filename = signal_filename(signal, part)
            cached = cache_root() / descriptor.name / filename
            if not cached.exists():
                _fetch(descriptor.locate(filename), cached)
            fetched.append(cached)
    if descriptor.truth_file:
        load_ground_truth(dataset, registry)
    return fetched

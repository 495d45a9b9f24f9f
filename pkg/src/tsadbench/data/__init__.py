from tsadbench.data.registry import (
    DatasetDescriptor, DatasetRegistry, cache_root, fetch_dataset, load_ground_truth, load_signal)
from tsadbench.data.synthetic import generate_synthetic, suite_configs, write_dataset

__all__ = [
    "DatasetDescriptor", "DatasetRegistry", "cache_root", "fetch_dataset", "generate_synthetic",
    "load_ground_truth", "load_signal", "suite_configs", "write_dataset",
]

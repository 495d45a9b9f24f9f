from tsadbench.core.engine import Detection, ExecutionContext, FittedPipeline, detect, fit
from tsadbench.core.specs import (
    PipelineSpec, PrimitiveRegistry, PrimitiveSpec, load_pipeline_file, load_pipeline_spec,
    load_pipelines, load_primitive_spec, resolve_hyperparameters)
from tsadbench.core.types import AnomalyInterval, TimeSeries

__all__ = [
    "AnomalyInterval", "Detection", "ExecutionContext", "FittedPipeline", "PipelineSpec",
    "PrimitiveRegistry", "PrimitiveSpec", "TimeSeries", "detect", "fit",
    "load_pipeline_file", "load_pipeline_spec", "load_pipelines", "load_primitive_spec",
    "resolve_hyperparameters",
]

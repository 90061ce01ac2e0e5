"""Network intrusion detection and response with explainable predictions."""

__version__ = "0.1.0"

from .attribution import (
    AttributionConfig,
    AttributionReport,
    BackgroundSet,
    FeatureSet,
    attribute,
    fuse,
    lime_explain,
    shapley_exact,
    shapley_sampled,
    top_k,
)
from .explain import ExplanationResult, PromptSpec, ProviderConfig, generate_prompt
from .forest import (
    ForestModel,
    Prediction,
    TrainConfig,
    deploy_model,
    fit_forest,
    parse_model,
    predict,
    serialize_model,
)
from .pipeline import (
    DetectionEvent,
    PipelineCore,
    PipelineStats,
    SeverityPolicy,
    classify_severity,
    run_pipeline,
)
from .schema import (
    FeatureSchema,
    FeatureSpec,
    FlowRecord,
    TransformedVector,
    ValidationOptions,
    define_schema,
    transform,
    validate,
)
from .streams import FileReplayStream, InMemoryBroker, replay_file

__all__ = [
    "AttributionConfig",
    "AttributionReport",
    "BackgroundSet",
    "DetectionEvent",
    "ExplanationResult",
    "FeatureSchema",
    "FeatureSet",
    "FeatureSpec",
    "FileReplayStream",
    "FlowRecord",
    "ForestModel",
    "InMemoryBroker",
    "PipelineCore",
    "PipelineStats",
    "Prediction",
    "PromptSpec",
    "ProviderConfig",
    "SeverityPolicy",
    "TrainConfig",
    "TransformedVector",
    "ValidationOptions",
    "attribute",
    "classify_severity",
    "define_schema",
    "deploy_model",
    "fit_forest",
    "fuse",
    "generate_prompt",
    "lime_explain",
    "parse_model",
    "predict",
    "replay_file",
    "run_pipeline",
    "serialize_model",
    "shapley_exact",
    "shapley_sampled",
    "top_k",
    "transform",
    "validate",
]

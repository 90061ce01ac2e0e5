"""Model interpretation: SHAP + LIME attributions, top-k selection, fusion.

The fused feature set is the union of the top-k sets from both methods,
keeping SHAP order first and tagging each feature with the method(s) that
nominated it.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..forest import ForestModel
from ..schema import FeatureSchema
from .background import BackgroundSet, background_from_json, reservoir_background
from .lime import LimeConfig, LimeResult, lime_explain
from .shapley import ProbModel, ShapResult, shapley_exact, shapley_sampled

__all__ = [
    "AttributionConfig",
    "AttributionReport",
    "BackgroundSet",
    "FeatureSet",
    "FeatureScore",
    "LimeConfig",
    "LimeResult",
    "ShapResult",
    "attribute",
    "background_from_json",
    "fuse",
    "lime_explain",
    "reservoir_background",
    "shapley_exact",
    "shapley_sampled",
    "top_k",
]


@dataclass(frozen=True)
class FeatureScore:
    name: str
    score: float
    sources: tuple[str, ...]


@dataclass(frozen=True)
class FeatureSet:
    entries: tuple[FeatureScore, ...]
    origin: str  # "SHAP" | "LIME" | "FUSED"

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries)

    def to_payload(self) -> list[dict]:
        return [
            {"name": e.name, "score": e.score, "sources": list(e.sources)}
            for e in self.entries
        ]


def top_k(scores, names, k: int, origin: str = "SHAP") -> FeatureSet:
    """k features of largest |score|; ties broken by ascending feature index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scores = list(scores)
    names = list(names)
    if len(scores) != len(names):
        raise ValueError(f"{len(scores)} scores vs {len(names)} names")
    order = sorted(range(len(scores)), key=lambda i: (-abs(scores[i]), i))
    entries = tuple(
        FeatureScore(name=names[i], score=float(scores[i]), sources=(origin,))
        for i in order[:k]
    )
    return FeatureSet(entries=entries, origin=origin)


def fuse(f_shap: FeatureSet, f_lime: FeatureSet) -> FeatureSet:
    """Set union, SHAP entries first, then LIME entries not already present."""
    merged: dict[str, FeatureScore] = {}
    for e in f_shap.entries:
        merged[e.name] = FeatureScore(e.name, e.score, ("SHAP",))
    for e in f_lime.entries:
        if e.name in merged:
            prev = merged[e.name]
            merged[e.name] = FeatureScore(prev.name, prev.score, prev.sources + ("LIME",))
        else:
            merged[e.name] = FeatureScore(e.name, e.score, ("LIME",))
    return FeatureSet(entries=tuple(merged.values()), origin="FUSED")


@dataclass(frozen=True)
class AttributionConfig:
    k: int = 5
    exact_max_features: int = 12  # exact/sampled crossover
    n_samples: int = 2000
    seed: int = 0
    lime: LimeConfig = field(default_factory=LimeConfig)


@dataclass(frozen=True)
class AttributionReport:
    shap: ShapResult
    lime: LimeResult
    f_shap: FeatureSet
    f_lime: FeatureSet
    f_final: FeatureSet
    elapsed_ms: int

    def to_payload(self) -> dict:
        return {
            "shap": {
                "phi": list(self.shap.phi),
                "base_value": self.shap.base_value,
                "predicted_output": self.shap.predicted_output,
                "method": self.shap.method,
                "n_samples": self.shap.n_samples,
                "seed": self.shap.seed,
                "repair": self.shap.repair,
            },
            "lime": {
                "coefficients": list(self.lime.coefficients),
                "intercept": self.lime.intercept,
                "kernel_width": self.lime.kernel_width,
                "n_perturbations": self.lime.n_perturbations,
                "seed": self.lime.seed,
                "surrogate_r2": self.lime.surrogate_r2,
                "ridge_lambda": self.lime.ridge_lambda,
            },
            "f_shap": self.f_shap.to_payload(),
            "f_lime": self.f_lime.to_payload(),
            "f_final": self.f_final.to_payload(),
            "elapsed_ms": self.elapsed_ms,
        }


def attribute(
    model: ForestModel | ProbModel,
    x: np.ndarray,
    background: BackgroundSet,
    schema: FeatureSchema,
    config: AttributionConfig = AttributionConfig(),
    class_index: int | None = None,
) -> AttributionReport:
    """Full dual-method report for one instance (predicted class by default)."""
    started = time.monotonic()
    x = np.asarray(x, dtype=np.float64).ravel()
    if class_index is None:
        probs = model.predict_proba(x[None, :])[0]
        class_index = int(np.argmax(probs))

    if x.size <= config.exact_max_features:
        shap = shapley_exact(model, x, background, class_index)
    else:
        shap = shapley_sampled(
            model, x, background, class_index, n_samples=config.n_samples, seed=config.seed
        )

    discrete = tuple(
        i for i, f in enumerate(schema.features) if f.kind in ("binary", "categorical")
    )
    lime = lime_explain(
        model, x, background, class_index, config=config.lime, discrete_features=discrete
    )

    names = schema.feature_names
    f_shap = top_k(shap.phi, names, config.k, origin="SHAP")
    f_lime = top_k(lime.coefficients, names, config.k, origin="LIME")
    f_final = fuse(f_shap, f_lime)
    elapsed_ms = int((time.monotonic() - started) * 1000)
    return AttributionReport(
        shap=shap, lime=lime, f_shap=f_shap, f_lime=f_lime, f_final=f_final, elapsed_ms=elapsed_ms
    )

"""Feature contract: schema definition, record validation, vectorization.

A schema fixes the canonical feature order. Every transformed vector is
positionally aligned with it, so downstream code (model, attributions) can
use plain arrays.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import ContractError, InvalidRecord, ParseError

FEATURE_KINDS = ("numeric", "binary", "categorical")

# Strict cross-platform numeric syntax: int / decimal / scientific.
# Deliberately rejects locale separators, underscores, "nan", "inf".
_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str
    unit: str = ""
    bounds: tuple[float, float] | None = None
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.name:
            raise ContractError("feature name must be non-empty")
        if self.kind not in FEATURE_KINDS:
            raise ContractError(f"unknown feature kind: {self.kind!r}")
        if self.kind == "categorical":
            if not self.categories:
                raise ContractError(f"categorical feature {self.name!r} needs categories")
            if len(set(self.categories)) != len(self.categories):
                raise ContractError(f"duplicate categories on feature {self.name!r}")
        elif self.categories:
            raise ContractError(f"{self.kind} feature {self.name!r} must not list categories")
        if self.bounds is not None:
            lo, hi = self.bounds
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ContractError(f"bad bounds on feature {self.name!r}: [{lo}, {hi}]")


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature contract. Position i of every vector is features[i]."""

    features: tuple[FeatureSpec, ...]
    class_labels: tuple[str, ...]
    version: int

    def __post_init__(self):
        if not self.features:
            raise ContractError("schema must define at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ContractError(f"duplicate feature names: {', '.join(dupes)}")
        if not self.class_labels:
            raise ContractError("schema must define at least one class label")
        if len(set(self.class_labels)) != len(self.class_labels):
            raise ContractError("duplicate class labels")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index_of(self, name: str) -> int:
        return self.feature_names.index(name)

    def to_document(self) -> dict:
        feats = []
        for f in self.features:
            d: dict[str, Any] = {"name": f.name, "kind": f.kind}
            if f.unit:
                d["unit"] = f.unit
            if f.bounds is not None:
                d["bounds"] = list(f.bounds)
            if f.categories:
                d["categories"] = list(f.categories)
            feats.append(d)
        return {"features": feats, "class_labels": list(self.class_labels)}


@dataclass(frozen=True)
class FlowRecord:
    """One pre-featurized flow as it arrived. received_at is set at ingest."""

    fields: Mapping[str, Any]
    received_at: float  # epoch seconds, ms precision
    source_id: str = ""


@dataclass(frozen=True)
class TransformedVector:
    values: tuple[float, ...]
    schema_version: int

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


@dataclass(frozen=True)
class ValidationVerdict:
    valid: bool
    reasons: tuple[str, ...] = ()


@dataclass
class ValidationOptions:
    # Strict mode: unknown fields invalidate the record. Lenient ignores them.
    strict: bool = True


_DEFAULT_OPTIONS = ValidationOptions()


def define_schema(document: str | bytes | Mapping, previous_version: int | None = None) -> FeatureSchema:
    """Parse and validate a schema document; reject rather than repair.

    Version is assigned here (previous + 1, or 1), never taken from the file.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as e:
            raise ParseError(f"schema document is not valid JSON: {e}") from None
    else:
        doc = document
    if not isinstance(doc, Mapping):
        raise ParseError("schema document must be a JSON object")
    if "features" not in doc or "class_labels" not in doc:
        raise ParseError("schema document needs 'features' and 'class_labels'")
    raw_features = doc["features"]
    if not isinstance(raw_features, list):
        raise ParseError("'features' must be an array")

    features = []
    for i, rf in enumerate(raw_features):
        if not isinstance(rf, Mapping) or "name" not in rf or "kind" not in rf:
            raise ParseError(f"feature #{i} needs 'name' and 'kind'")
        bounds = rf.get("bounds")
        if bounds is not None:
            if not isinstance(bounds, (list, tuple)) or len(bounds) != 2:
                raise ParseError(f"feature {rf['name']!r}: bounds must be [lo, hi]")
            bounds = (float(bounds[0]), float(bounds[1]))
        features.append(
            FeatureSpec(
                name=str(rf["name"]),
                kind=str(rf["kind"]),
                unit=str(rf.get("unit", "")),
                bounds=bounds,
                categories=tuple(str(c) for c in rf.get("categories", [])),
            )
        )
    labels = doc["class_labels"]
    if not isinstance(labels, list):
        raise ParseError("'class_labels' must be an array")
    version = 1 if previous_version is None else previous_version + 1
    return FeatureSchema(
        features=tuple(features),
        class_labels=tuple(str(c) for c in labels),
        version=version,
    )


def _parse_scalar(value: Any) -> float | None:
    """Parse a raw field value to a finite float, or None if unparseable."""
    if isinstance(value, bool):
        return float(value)
    if isinstance(value, (int, float)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, str):
        s = value.strip()
        if not _NUMBER_RE.match(s):
            return None
        v = float(s)
        return v if math.isfinite(v) else None
    return None


def validate(
    record: FlowRecord,
    schema: FeatureSchema,
    options: ValidationOptions = _DEFAULT_OPTIONS,
) -> ValidationVerdict:
    """Check a record against the schema. Lists every violation, not just the first."""
    reasons: list[str] = []
    fields = record.fields
    for spec in schema.features:
        if spec.name not in fields:
            reasons.append(f"missing field: {spec.name}")
            continue
        raw = fields[spec.name]
        if spec.kind == "categorical":
            if str(raw) not in spec.categories:
                reasons.append(
                    f"field {spec.name}: {raw!r} not in categories {list(spec.categories)}"
                )
            continue
        value = _parse_scalar(raw)
        if value is None:
            reasons.append(f"field {spec.name}: {raw!r} is not a finite number")
            continue
        if spec.kind == "binary":
            if value not in (0.0, 1.0):
                reasons.append(f"field {spec.name}: binary value must be 0 or 1, got {raw!r}")
            continue
        if spec.bounds is not None:
            lo, hi = spec.bounds
            if not (lo <= value <= hi):
                reasons.append(f"field {spec.name}: {value} outside bounds [{lo}, {hi}]")
    if options.strict:
        known = set(schema.feature_names)
        for name in fields:
            if name not in known:
                reasons.append(f"unknown field: {name}")
    return ValidationVerdict(valid=not reasons, reasons=tuple(reasons))


def transform(
    record: FlowRecord,
    schema: FeatureSchema,
    options: ValidationOptions = _DEFAULT_OPTIONS,
    *,
    assume_valid: bool = False,
) -> TransformedVector:
    """Vectorize a valid record in schema order.

    assume_valid skips the redundant validate() for callers that just ran
    it themselves (the ingest loop); everyone else gets the precondition
    surfaced as InvalidRecord.
    """
    if not assume_valid:
        verdict = validate(record, schema, options)
        if not verdict.valid:
            raise InvalidRecord("; ".join(verdict.reasons))
    values = []
    for spec in schema.features:
        raw = record.fields[spec.name]
        if spec.kind == "categorical":
            values.append(float(spec.categories.index(str(raw))))
        else:
            values.append(_parse_scalar(raw))  # finite by validation
    return TransformedVector(values=tuple(values), schema_version=schema.version)

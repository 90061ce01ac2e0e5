"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class SchemaOut(BaseModel):
    schema_version: int
    feature_count: int
    class_labels: list[str]


class ModelOut(BaseModel):
    model_id: str
    schema_version: int
    n_trees: int
    class_labels: list[str]
    background_vectors: int | None = None


class IngestOut(BaseModel):
    event_id: str
    seq: int
    predicted_class: str
    probabilities: list[float]
    severity: str


class InvalidRecordOut(BaseModel):
    error: Literal["InvalidRecord"] = "InvalidRecord"
    reasons: list[str]


class EventsOut(BaseModel):
    events: list[dict[str, Any]]
    last_seq: int


class ExplainIn(BaseModel):
    experience_level: Literal["novice", "intermediate", "expert"]
    descriptiveness: Literal["concise", "detailed"]


class ExplainOut(BaseModel):
    event_id: str
    prompt: str
    prompt_hash: str
    text: str
    provider: str
    model_name: str
    latency_ms: int
    attempts: int
    created_at: float
    error: str | None = None


class StatsOut(BaseModel):
    consumed: int
    valid: int
    invalid: int
    predicted: int
    attributed: int
    attribution_skipped: int
    failed: int
    started_at: float
    last_seq: int
    connections: int
    model_id: str | None = None
    schema_version: int | None = None
    provider_enabled: bool


class HealthOut(BaseModel):
    status: str = "ok"
    model_id: str | None = None
    schema_version: int | None = None


class ErrorOut(BaseModel):
    error: str
    detail: str = Field(default="")

"""The consume -> validate -> transform -> predict -> publish loop, with
attribution detached onto a bounded worker pool.

Invalid records are counted, logged with every violation, and skipped;
only valid records produce output-topic predictions and detection events.
The event sink append is the durability boundary: the source message is
acked only after the sink accepted the event.
"""

from __future__ import annotations

import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Protocol

from .attribution import AttributionConfig, AttributionReport, BackgroundSet, attribute
from .errors import StreamClosed
from .forest import ForestModel, Prediction, predict
from .ids import UlidFactory
from .schema import (
    FeatureSchema,
    FlowRecord,
    TransformedVector,
    ValidationOptions,
    transform,
    validate,
)
from .streams import INPUT_TOPIC, OUTPUT_TOPIC

logger = logging.getLogger("sentinel.pipeline")

SEVERITY_LEVELS = ("info", "warning", "critical")
SEVERITY_RANK = {name: i for i, name in enumerate(SEVERITY_LEVELS)}


@dataclass(frozen=True)
class SeverityPolicy:
    benign_labels: frozenset[str] = frozenset({"Benign", "BENIGN", "BenignTraffic"})
    critical_threshold: float = 0.8


def classify_severity(prediction: Prediction, policy: SeverityPolicy = SeverityPolicy()) -> str:
    if prediction.predicted_class in policy.benign_labels:
        return "info"
    confidence = prediction.probabilities[prediction.predicted_index]
    return "critical" if confidence >= policy.critical_threshold else "warning"


@dataclass
class PipelineStats:
    """Monotone counters; consumed == valid + invalid at every instant."""

    consumed: int = 0
    valid: int = 0
    invalid: int = 0
    predicted: int = 0
    attributed: int = 0
    attribution_skipped: int = 0
    failed: int = 0
    started_at: float = field(default_factory=time.time)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def bump(self, **names: int) -> None:
        with self._lock:
            for name, delta in names.items():
                setattr(self, name, getattr(self, name) + delta)

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "consumed": self.consumed,
                "valid": self.valid,
                "invalid": self.invalid,
                "predicted": self.predicted,
                "attributed": self.attributed,
                "attribution_skipped": self.attribution_skipped,
                "failed": self.failed,
                "started_at": self.started_at,
            }


@dataclass
class DetectionEvent:
    event_id: str
    record: FlowRecord
    vector: TransformedVector
    prediction: Prediction
    severity: str
    pipeline_latency_ms: int
    model_id: str
    attribution: AttributionReport | None = None
    explanation: Any = None

    def to_payload(self) -> dict:
        return {
            "event_id": self.event_id,
            "received_at": self.record.received_at,
            "source_id": self.record.source_id,
            "record": dict(self.record.fields),
            "vector": list(self.vector.values),
            "schema_version": self.vector.schema_version,
            "model_id": self.model_id,
            "prediction": {
                "probabilities": list(self.prediction.probabilities),
                "predicted_class": self.prediction.predicted_class,
                "predicted_index": self.prediction.predicted_index,
            },
            "severity": self.severity,
            "pipeline_latency_ms": self.pipeline_latency_ms,
        }


class EventSink(Protocol):
    """Where finished events go. emit() must be durable before it returns."""

    def emit(self, event: DetectionEvent) -> None: ...

    def attach_attribution(self, event_id: str, report: AttributionReport) -> None: ...


class CollectingSink:
    """Minimal in-memory sink for tests and dry runs."""

    def __init__(self):
        self.events: list[DetectionEvent] = []
        self.attributions: dict[str, AttributionReport] = {}
        self._lock = threading.Lock()

    def emit(self, event: DetectionEvent) -> None:
        with self._lock:
            self.events.append(event)

    def attach_attribution(self, event_id: str, report: AttributionReport) -> None:
        with self._lock:
            self.attributions[event_id] = report


class AttributionScheduler:
    """Bounded detached workers. When saturated, new work is skipped rather
    than queued, so prediction publishing never waits on attribution."""

    def __init__(
        self,
        sink: EventSink,
        background: BackgroundSet,
        schema: FeatureSchema,
        config: AttributionConfig,
        stats: PipelineStats,
        workers: int = 2,
        max_pending: int = 256,
        attribute_fn=attribute,
    ):
        self._sink = sink
        self._background = background
        self._schema = schema
        self._config = config
        self._stats = stats
        self._attribute = attribute_fn
        self._pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="attrib")
        self._tickets = threading.Semaphore(max_pending)

    def retarget(self, schema: FeatureSchema, background: BackgroundSet) -> None:
        """Point the workers at a newly deployed schema/background."""
        self._schema = schema
        self._background = background

    def schedule(self, model: ForestModel, event: DetectionEvent) -> bool:
        if not self._tickets.acquire(blocking=False):
            self._stats.bump(attribution_skipped=1)
            return False
        self._pool.submit(self._run, model, event)
        return True

    def _run(self, model: ForestModel, event: DetectionEvent) -> None:
        try:
            report = self._attribute(
                model,
                event.vector.as_array(),
                self._background,
                self._schema,
                self._config,
                class_index=event.prediction.predicted_index,
            )
            self._sink.attach_attribution(event.event_id, report)
            self._stats.bump(attributed=1)
        except Exception:
            logger.exception("attribution failed for event %s", event.event_id)
            self._stats.bump(failed=1)
        finally:
            self._tickets.release()

    def drain(self) -> None:
        self._pool.shutdown(wait=True)


class PipelineCore:
    """Single-record processing shared by the stream loop and the HTTP
    ingest bypass. Model/schema references swap atomically."""

    def __init__(
        self,
        schema: FeatureSchema,
        model: ForestModel,
        sink: EventSink,
        stats: PipelineStats | None = None,
        severity_policy: SeverityPolicy = SeverityPolicy(),
        validation: ValidationOptions | None = None,
        scheduler: AttributionScheduler | None = None,
        ids: UlidFactory | None = None,
        dead_letter_topic: str | None = None,
    ):
        self.schema = schema
        self.model = model
        self.sink = sink
        self.stats = stats or PipelineStats()
        self.severity_policy = severity_policy
        self.validation = validation or ValidationOptions()
        self.scheduler = scheduler
        self.ids = ids or UlidFactory()
        self.dead_letter_topic = dead_letter_topic

    def process(self, fields: dict, source_id: str, publish=None):
        """Run one record through the full path.

        Returns (event, verdict); event is None when validation failed.
        """
        schema, model = self.schema, self.model  # snapshot: swap-safe
        received_at = round(time.time(), 3)
        started = time.monotonic()
        self.stats.bump(consumed=1)
        record = FlowRecord(fields=fields, received_at=received_at, source_id=source_id)
        verdict = validate(record, schema, self.validation)
        if not verdict.valid:
            self.stats.bump(invalid=1)
            logger.warning(
                "skipping invalid record from %s: %s", source_id, "; ".join(verdict.reasons)
            )
            return None, verdict

        self.stats.bump(valid=1)
        vector = transform(record, schema, self.validation, assume_valid=True)
        prediction = predict(model, vector)
        event_id = self.ids.new()
        if publish is not None:
            publish(
                {
                    "event_id": event_id,
                    "predicted_class": prediction.predicted_class,
                    "probabilities": list(prediction.probabilities),
                    "schema_version": vector.schema_version,
                    "model_id": model.model_id,
                    "ts": received_at,
                }
            )
        self.stats.bump(predicted=1)
        event = DetectionEvent(
            event_id=event_id,
            record=record,
            vector=vector,
            prediction=prediction,
            severity=classify_severity(prediction, self.severity_policy),
            pipeline_latency_ms=int((time.monotonic() - started) * 1000),
            model_id=model.model_id,
        )
        self.sink.emit(event)  # durable before ack; failures are fatal upstream
        if self.scheduler is not None:
            self.scheduler.schedule(model, event)
        return event, verdict


def run_pipeline(
    stream,
    core: PipelineCore,
    stop: threading.Event | None = None,
    poll_timeout_s: float = 0.05,
) -> PipelineStats:
    """Consume the input topic until the stream closes or stop is set.

    Sink failures propagate (ingest halts: durability over availability).
    Graceful termination drains in-flight attribution work.
    """
    stop = stop or threading.Event()

    def publish(payload):
        stream.publish(OUTPUT_TOPIC, payload)

    try:
        while not stop.is_set():
            try:
                msg = stream.consume(INPUT_TOPIC, timeout_s=poll_timeout_s)
            except StreamClosed:
                break
            if msg is None:
                continue
            source_id = f"{stream.name}:{msg.offset}"
            event, verdict = core.process(msg.payload, source_id, publish=publish)
            if event is None and core.dead_letter_topic:
                stream.publish(
                    core.dead_letter_topic,
                    {"fields": msg.payload, "reasons": list(verdict.reasons)},
                )
            stream.ack(msg)
    finally:
        if core.scheduler is not None:
            core.scheduler.drain()
    return core.stats

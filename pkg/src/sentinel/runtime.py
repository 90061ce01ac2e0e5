"""Service runtime: owns the deployed schema/model, the event log, the
broadcast hub, alert dispatch, the LLM provider client, and the pipeline.

The FastAPI layer and the stream loop both drive this object; it is the one
place where late attribution/explanation data is folded into the log and
fanned out to live clients.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .alerts import AlertSink, dispatch_alert
from .attribution import (
    AttributionConfig,
    AttributionReport,
    BackgroundSet,
    FeatureScore,
    FeatureSet,
    LimeConfig,
    background_from_json,
)
from .errors import AttributionPending, NotFound, NotReady, ProviderError
from .eventlog import EventLog
from .explain import (
    ExplanationResult,
    PromptSpec,
    ProviderClient,
    ProviderConfig,
    generate_prompt,
    load_provider_config,
    prompt_hash,
)
from .forest import ForestModel, deploy_model
from .hub import BroadcastHub
from .ids import UlidFactory
from .pipeline import (
    AttributionScheduler,
    DetectionEvent,
    PipelineCore,
    PipelineStats,
    SeverityPolicy,
    run_pipeline,
)
from .schema import FeatureSchema, ValidationOptions, define_schema
from .streams import InMemoryBroker

logger = logging.getLogger("sentinel.runtime")


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    log_path: str = "events.jsonl"
    fsync: bool = False
    api_token: str | None = None
    strict_validation: bool = True
    dead_letter_topic: str | None = None
    severity: SeverityPolicy = field(default_factory=SeverityPolicy)
    attribution: AttributionConfig = field(default_factory=AttributionConfig)
    attribution_enabled: bool = True
    attribution_workers: int = 2
    attribution_max_pending: int = 256
    alert_sinks: list[AlertSink] = field(default_factory=list)
    hub_buffer: int = 1000
    stats_every: int = 100
    schema_file: str | None = None
    model_file: str | None = None
    background_file: str | None = None
    dashboard_dir: str | None = None  # built SPA to serve at /

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls.from_dict(doc)

    @classmethod
    def from_dict(cls, doc: dict) -> "ServiceConfig":
        severity = SeverityPolicy(
            benign_labels=frozenset(
                doc.get("severity", {}).get("benign_labels", SeverityPolicy().benign_labels)
            ),
            critical_threshold=float(
                doc.get("severity", {}).get("critical_threshold", 0.8)
            ),
        )
        att = doc.get("attribution", {})
        lime = att.get("lime", {})
        attribution = AttributionConfig(
            k=int(att.get("k", 5)),
            exact_max_features=int(att.get("exact_max_features", 12)),
            n_samples=int(att.get("n_samples", 2000)),
            seed=int(att.get("seed", 0)),
            lime=LimeConfig(
                n_perturbations=int(lime.get("n_perturbations", 500)),
                kernel_width=lime.get("kernel_width"),
                ridge_lambda=float(lime.get("ridge_lambda", 1.0)),
                seed=int(lime.get("seed", 0)),
            ),
        )
        sinks = [
            AlertSink(
                kind=s["kind"],
                min_severity=s.get("min_severity", "warning"),
                endpoint=s.get("endpoint", ""),
                max_retries=int(s.get("max_retries", 2)),
                name=s.get("name", ""),
            )
            for s in doc.get("alerts", [])
        ]
        return cls(
            host=doc.get("host", "127.0.0.1"),
            port=int(doc.get("port", 8000)),
            log_path=doc.get("log_path", "events.jsonl"),
            fsync=bool(doc.get("fsync", False)),
            api_token=doc.get("api_token"),
            strict_validation=bool(doc.get("strict_validation", True)),
            dead_letter_topic=doc.get("dead_letter_topic"),
            severity=severity,
            attribution=attribution,
            attribution_enabled=bool(att.get("enabled", True)),
            attribution_workers=int(att.get("workers", 2)),
            attribution_max_pending=int(att.get("max_pending", 256)),
            alert_sinks=sinks,
            hub_buffer=int(doc.get("hub_buffer", 1000)),
            stats_every=int(doc.get("stats_every", 100)),
            schema_file=doc.get("schema_file"),
            model_file=doc.get("model_file"),
            background_file=doc.get("background_file"),
            dashboard_dir=doc.get("dashboard_dir"),
        )


class GatewaySink:
    """Event sink that appends to the log, fans out live messages, and
    dispatches alerts off the ingest path."""

    def __init__(self, runtime: "SentinelRuntime"):
        self._rt = runtime
        self._alert_pool = ThreadPoolExecutor(max_workers=2, thread_name_prefix="alerts")

    def emit(self, event: DetectionEvent) -> None:
        rt = self._rt
        payload = event.to_payload()
        seq = rt.event_log.append_event(payload)  # durable before ack
        view = dict(payload)
        view["seq"] = seq
        rt.hub.broadcast("detection", view)
        if rt.config.alert_sinks:
            self._alert_pool.submit(self._dispatch, view)
        if rt.config.stats_every and seq % rt.config.stats_every == 0:
            rt.hub.broadcast("stats", rt.stats_snapshot())

    def _dispatch(self, view: dict) -> None:
        try:
            report = dispatch_alert(view, self._rt.config.alert_sinks, post=self._rt.alert_post)
            if report.deliveries:
                self._rt.hub.broadcast(
                    "alert",
                    {
                        "event_id": report.event_id,
                        "severity": view["severity"],
                        "predicted_class": view["prediction"]["predicted_class"],
                        "deliveries": [
                            {"sink": d.sink, "delivered": d.delivered, "attempts": d.attempts}
                            for d in report.deliveries
                        ],
                    },
                )
        except Exception:
            logger.exception("alert dispatch failed")

    def attach_attribution(self, event_id: str, report: AttributionReport) -> None:
        rt = self._rt
        payload = report.to_payload()
        rt.event_log.append_amendment(event_id, {"attribution": payload})
        rt.hub.broadcast("attribution_update", {"event_id": event_id, "attribution": payload})

    def close(self) -> None:
        self._alert_pool.shutdown(wait=False)


class SentinelRuntime:
    def __init__(
        self,
        config: ServiceConfig | None = None,
        provider: ProviderConfig | None = None,
        alert_post=None,
        provider_transport=None,
    ):
        self.config = config or ServiceConfig()
        self.event_log = EventLog(self.config.log_path, fsync=self.config.fsync)
        self.hub = BroadcastHub(buffer_size=self.config.hub_buffer)
        self.stats = PipelineStats()
        self.broker = InMemoryBroker()
        self.ids = UlidFactory()
        self.alert_post = alert_post
        self.schema: FeatureSchema | None = None
        self.model: ForestModel | None = None
        self.background: BackgroundSet | None = None
        self._sink = GatewaySink(self)
        self._core: PipelineCore | None = None
        self._scheduler: AttributionScheduler | None = None
        self._pipeline_thread: threading.Thread | None = None
        self._pipeline_stop = threading.Event()
        self._lock = threading.Lock()

        provider_config = provider if provider is not None else load_provider_config()
        self.provider = ProviderClient(provider_config, transport=provider_transport)

        if self.config.schema_file:
            self.define_schema(Path(self.config.schema_file).read_text(encoding="utf-8"))
        if self.config.background_file:
            self.set_background(Path(self.config.background_file).read_text(encoding="utf-8"))
        if self.config.model_file:
            self.deploy_model(Path(self.config.model_file).read_bytes())

    # -- deployment ------------------------------------------------------

    def define_schema(self, document: str | bytes | dict) -> FeatureSchema:
        with self._lock:
            previous = self.schema.version if self.schema else None
            schema = define_schema(document, previous_version=previous)
            self.schema = schema
            self._rebuild_core()
            return schema

    def deploy_model(self, artifact: bytes | str) -> ForestModel:
        with self._lock:
            if self.schema is None:
                raise NotReady("define a schema before deploying a model")
            model = deploy_model(artifact, self.schema)
            self.model = model  # atomic swap; in-flight work keeps the old ref
            self._rebuild_core()
            return model

    def set_background(self, document: str | bytes) -> BackgroundSet:
        with self._lock:
            self.background = background_from_json(document)
            self._rebuild_core()
            return self.background

    def _rebuild_core(self) -> None:
        if self.schema is None or self.model is None:
            return
        if (
            self.config.attribution_enabled
            and self.background is not None
            and self._scheduler is None
        ):
            self._scheduler = AttributionScheduler(
                sink=self._sink,
                background=self.background,
                schema=self.schema,
                config=self.config.attribution,
                stats=self.stats,
                workers=self.config.attribution_workers,
                max_pending=self.config.attribution_max_pending,
            )
        if self._core is None:
            self._core = PipelineCore(
                schema=self.schema,
                model=self.model,
                sink=self._sink,
                stats=self.stats,
                severity_policy=self.config.severity,
                validation=ValidationOptions(strict=self.config.strict_validation),
                scheduler=self._scheduler,
                ids=self.ids,
                dead_letter_topic=self.config.dead_letter_topic,
            )
        else:
            self._core.schema = self.schema
            self._core.model = self.model
            self._core.scheduler = self._scheduler
        if self._scheduler is not None:
            self._scheduler.retarget(self.schema, self.background)

    @property
    def ready(self) -> bool:
        return self._core is not None

    @property
    def core(self) -> PipelineCore:
        if self._core is None:
            raise NotReady("schema and model must be deployed first")
        return self._core

    # -- ingest paths ----------------------------------------------------

    def ingest(self, fields: dict[str, Any], source_id: str = "api"):
        """Broker-bypass single record. Returns (event|None, verdict)."""
        return self.core.process(fields, source_id)

    def start_broker_pipeline(self) -> None:
        """Consume the in-memory broker's input topic on a daemon thread."""
        if self._pipeline_thread is not None:
            return
        core = self.core
        self._pipeline_stop.clear()
        self._pipeline_thread = threading.Thread(
            target=run_pipeline,
            args=(self.broker, core, self._pipeline_stop),
            name="sentinel-pipeline",
            daemon=True,
        )
        self._pipeline_thread.start()

    def stop_broker_pipeline(self) -> None:
        if self._pipeline_thread is None:
            return
        self._pipeline_stop.set()
        self._pipeline_thread.join(timeout=10)
        self._pipeline_thread = None

    def run_replay(self, stream) -> PipelineStats:
        """Drive a replay stream through the pipeline to completion."""
        return run_pipeline(stream, self.core)

    # -- queries ---------------------------------------------------------

    def query_events(self, since_seq=0, predicted_class=None, severity=None, limit=100):
        return self.event_log.query(
            since_seq=since_seq,
            predicted_class=predicted_class,
            severity=severity,
            limit=limit,
        )

    def get_event(self, event_id: str) -> dict:
        view = self.event_log.get(event_id)
        if view is None:
            raise NotFound(f"no event {event_id!r}")
        return view

    def stats_snapshot(self) -> dict:
        snap = self.stats.snapshot()
        snap["last_seq"] = self.event_log.last_seq
        snap["connections"] = self.hub.connection_count
        snap["model_id"] = self.model.model_id if self.model else None
        snap["schema_version"] = self.schema.version if self.schema else None
        snap["provider_enabled"] = self.provider.enabled
        return snap

    # -- explanations ----------------------------------------------------

    def explain_event(
        self, event_id: str, experience_level: str, descriptiveness: str
    ) -> tuple[str, ExplanationResult]:
        """Build the prompt from the event's fused features and ask the provider.

        Returns (prompt, result). Provider failures come back inside the
        result (degraded mode), never as exceptions.
        """
        view = self.get_event(event_id)
        attribution = view.get("attribution")
        if not attribution:
            raise AttributionPending(f"event {event_id} has no attribution yet")
        fused = FeatureSet(
            entries=tuple(
                FeatureScore(e["name"], float(e["score"]), tuple(e.get("sources", ())))
                for e in attribution["f_final"]
            ),
            origin="FUSED",
        )
        spec = PromptSpec(
            influential_features=fused,
            predicted_attack=view["prediction"]["predicted_class"],
            experience_level=experience_level,
            descriptiveness=descriptiveness,
        )
        prompt = generate_prompt(spec)
        try:
            result = self.provider.request(prompt)
        except ProviderError as e:
            result = ExplanationResult(
                text="",
                provider=self.provider.config.provider_label,
                model_name=self.provider.config.model_name,
                prompt_hash=prompt_hash(prompt),
                latency_ms=0,
                created_at=time.time(),
                attempts=0,
                error=f"{type(e).__name__}: {e}",
            )
        payload = result.to_payload()
        payload["prompt"] = prompt
        payload["experience_level"] = experience_level
        payload["descriptiveness"] = descriptiveness
        self.event_log.append_amendment(event_id, {"explanation": payload})
        self.hub.broadcast("explanation_update", {"event_id": event_id, "explanation": payload})
        return prompt, result

    def close(self) -> None:
        self.stop_broker_pipeline()
        if self._scheduler is not None:
            self._scheduler.drain()
        self._sink.close()
        self.event_log.close()

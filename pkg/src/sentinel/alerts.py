"""Notification sinks: webhook (reference adapter), log, stdout.

Delivery is best effort with a per-sink retry budget; failures land in the
delivery report and never propagate into the ingest path.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Callable

from .pipeline import SEVERITY_RANK

logger = logging.getLogger("sentinel.alerts")


@dataclass(frozen=True)
class AlertSink:
    kind: str  # "webhook" | "log" | "stdout"
    min_severity: str = "warning"
    endpoint: str = ""
    max_retries: int = 2
    backoff_base_s: float = 0.1
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("webhook", "log", "stdout"):
            raise ValueError(f"unknown sink kind {self.kind!r}")
        if self.min_severity not in SEVERITY_RANK:
            raise ValueError(f"unknown severity {self.min_severity!r}")
        if self.kind == "webhook" and not self.endpoint:
            raise ValueError("webhook sink needs an endpoint")

    @property
    def label(self) -> str:
        return self.name or (self.endpoint if self.kind == "webhook" else self.kind)


@dataclass
class SinkDelivery:
    sink: str
    delivered: bool
    attempts: int
    error: str = ""


@dataclass
class DeliveryReport:
    event_id: str
    deliveries: list[SinkDelivery]

    @property
    def failed(self) -> list[SinkDelivery]:
        return [d for d in self.deliveries if not d.delivered]


def alert_body(event_view: dict) -> dict:
    attribution = event_view.get("attribution") or {}
    top_features = [e["name"] for e in attribution.get("f_final", [])]
    return {
        "event_id": event_view["event_id"],
        "predicted_class": event_view["prediction"]["predicted_class"],
        "severity": event_view["severity"],
        "top_features": top_features,
        "ts": event_view.get("received_at"),
    }


def _default_post(url: str, body: dict) -> int:
    import httpx

    return httpx.post(url, json=body, timeout=10.0).status_code


def dispatch_alert(
    event_view: dict,
    sinks: list[AlertSink],
    post: Callable[[str, dict], int] | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> DeliveryReport:
    """Fan an event out to every sink whose threshold it clears."""
    post = post or _default_post
    severity_rank = SEVERITY_RANK[event_view["severity"]]
    body = alert_body(event_view)
    deliveries: list[SinkDelivery] = []
    for sink in sinks:
        if severity_rank < SEVERITY_RANK[sink.min_severity]:
            continue
        deliveries.append(_deliver(sink, body, post, sleep))
    return DeliveryReport(event_id=event_view["event_id"], deliveries=deliveries)


def _deliver(sink: AlertSink, body: dict, post, sleep) -> SinkDelivery:
    if sink.kind == "log":
        logger.warning("alert %s: %s (%s)", body["severity"], body["predicted_class"], body["event_id"])
        return SinkDelivery(sink=sink.label, delivered=True, attempts=1)
    if sink.kind == "stdout":
        print(f"[alert:{body['severity']}] {body['predicted_class']} event={body['event_id']}")
        return SinkDelivery(sink=sink.label, delivered=True, attempts=1)

    attempts = 0
    error = ""
    while attempts <= sink.max_retries:
        attempts += 1
        try:
            status = post(sink.endpoint, body)
        except Exception as e:
            error = f"{type(e).__name__}: {e}"
            status = None
        if status is not None and 200 <= status < 300:
            return SinkDelivery(sink=sink.label, delivered=True, attempts=attempts)
        if status is not None:
            error = f"HTTP {status}"
        if attempts <= sink.max_retries:
            sleep(sink.backoff_base_s * 2 ** (attempts - 1))
    return SinkDelivery(sink=sink.label, delivered=False, attempts=attempts, error=error)

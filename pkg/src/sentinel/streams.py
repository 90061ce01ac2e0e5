"""Message-stream abstraction: in-memory broker and CSV file replay.

Both honor the same contract the pipeline relies on: per-topic FIFO from a
single producer, blocking consume with timeout, StreamClosed once a closed
topic drains, and explicit acks (the durability boundary).
"""

from __future__ import annotations

import csv
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import FileError, HeaderMismatch, StreamClosed
from .schema import FeatureSchema

INPUT_TOPIC = "InputData"
OUTPUT_TOPIC = "OutputPredictions"
LABEL_COLUMN = "label"


@dataclass(frozen=True)
class Message:
    topic: str
    offset: int
    payload: dict[str, Any]


class InMemoryBroker:
    """Thread-safe FIFO topics. The hermetic stand-in for an external broker."""

    name = "mem"

    def __init__(self):
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._queues: dict[str, deque[Message]] = {}
        self._offsets: dict[str, int] = {}
        self._closed: set[str] = set()
        self._acked: dict[str, set[int]] = {}

    def publish(self, topic: str, payload: dict) -> Message:
        with self._cond:
            if topic in self._closed:
                raise StreamClosed(f"topic {topic!r} is closed")
            offset = self._offsets.get(topic, 0)
            self._offsets[topic] = offset + 1
            msg = Message(topic=topic, offset=offset, payload=payload)
            self._queues.setdefault(topic, deque()).append(msg)
            self._cond.notify_all()
            return msg

    def consume(self, topic: str, timeout_s: float = 0.1) -> Message | None:
        deadline = time.monotonic() + timeout_s
        with self._cond:
            while True:
                q = self._queues.get(topic)
                if q:
                    return q.popleft()
                if topic in self._closed:
                    raise StreamClosed(f"topic {topic!r} drained")
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return None
                self._cond.wait(remaining)

    def ack(self, message: Message) -> None:
        with self._lock:
            self._acked.setdefault(message.topic, set()).add(message.offset)

    def acked(self, topic: str) -> set[int]:
        with self._lock:
            return set(self._acked.get(topic, set()))

    def close(self, topic: str) -> None:
        with self._cond:
            self._closed.add(topic)
            self._cond.notify_all()

    def drain(self, topic: str) -> list[Message]:
        """Pop everything currently queued (test/inspection helper)."""
        with self._lock:
            q = self._queues.get(topic, deque())
            out = list(q)
            q.clear()
            return out


class FileReplayStream:
    """Replays a labeled-or-unlabeled CSV as input messages, rate limited.

    The optional label column is stripped from payloads and kept aside for
    evaluation. Output-topic publishes are collected in memory.
    """

    def __init__(self, path: str | Path, schema: FeatureSchema, rate: float | None = None):
        self.path = Path(path)
        self.name = f"replay:{self.path.name}"
        if not self.path.exists():
            raise FileError(f"replay input not found: {self.path}")
        self._rate = rate
        self._schema = schema
        self._lock = threading.Lock()
        self._acked: set[int] = set()
        self.published: list[Message] = []
        self.labels: list[str] = []
        self._offset = 0
        self._started_at: float | None = None

        try:
            self._fh = self.path.open(newline="", encoding="utf-8")
        except OSError as e:
            raise FileError(f"cannot open {self.path}: {e}") from None
        self._reader = csv.reader(self._fh)
        try:
            header = next(self._reader)
        except StopIteration:
            raise HeaderMismatch(f"{self.path} is empty (no header row)") from None
        self._columns = [h.strip() for h in header]
        expected = set(schema.feature_names)
        present = set(self._columns)
        missing = sorted(expected - present)
        if missing:
            raise HeaderMismatch(f"header missing column(s): {', '.join(missing)}")
        unexpected = sorted(present - expected - {LABEL_COLUMN})
        if unexpected:
            raise HeaderMismatch(f"header has unexpected column(s): {', '.join(unexpected)}")
        self._label_idx = self._columns.index(LABEL_COLUMN) if LABEL_COLUMN in self._columns else None

    @property
    def total_produced(self) -> int:
        return self._offset

    def consume(self, topic: str, timeout_s: float = 0.1) -> Message | None:
        if topic != INPUT_TOPIC:
            raise StreamClosed(f"replay stream only produces on {INPUT_TOPIC!r}")
        try:
            row = next(self._reader)
        except StopIteration:
            self._fh.close()
            raise StreamClosed("replay file drained") from None

        if self._rate is not None:
            if self._started_at is None:
                self._started_at = time.monotonic()
            due = self._started_at + self._offset / self._rate
            delay = due - time.monotonic()
            if delay > 0:
                time.sleep(delay)

        payload: dict[str, Any] = {}
        label = ""
        for i, col in enumerate(self._columns):
            value = row[i] if i < len(row) else ""
            if i == self._label_idx:
                label = value
            else:
                payload[col] = value
        self.labels.append(label)
        msg = Message(topic=INPUT_TOPIC, offset=self._offset, payload=payload)
        self._offset += 1
        return msg

    def publish(self, topic: str, payload: dict) -> Message:
        with self._lock:
            msg = Message(topic=topic, offset=len(self.published), payload=payload)
            self.published.append(msg)
            return msg

    def ack(self, message: Message) -> None:
        with self._lock:
            self._acked.add(message.offset)

    def acked(self, topic: str = INPUT_TOPIC) -> set[int]:
        with self._lock:
            return set(self._acked)

    def close(self, topic: str | None = None) -> None:
        self._fh.close()


def replay_file(path: str | Path, schema: FeatureSchema, rate: float | None = None) -> FileReplayStream:
    """Open a CSV replay stream. rate is records/second; None means unlimited."""
    if rate is not None and rate <= 0:
        raise ValueError("rate must be positive (or None for unlimited)")
    return FileReplayStream(path, schema, rate)

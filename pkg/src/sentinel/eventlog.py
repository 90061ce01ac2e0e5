"""Append-only JSONL event log with amendment entries.

Original lines are never rewritten: late-arriving attribution/explanation
data lands as amendment lines referencing the event id. Readers get merged
views folded from an in-memory index that is rebuilt by replaying the file
on open, which is also the crash-recovery path.
"""

from __future__ import annotations

import json
import os
import threading
import time
from pathlib import Path

from .errors import BadFilter, IntegrityError, NotFound, StorageFull
from .pipeline import SEVERITY_RANK

MAX_QUERY_LIMIT = 10000


class EventLog:
    def __init__(self, path: str | Path, fsync: bool = False):
        self.path = Path(path)
        self._fsync = fsync
        self._lock = threading.Lock()
        self._seq = 0
        self._order: list[str] = []  # event ids in first-seen (seq) order
        self._events: dict[str, dict] = {}  # event id -> merged view
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            self._replay()
        self._fh = self.path.open("a", encoding="utf-8")

    def _replay(self) -> None:
        with self.path.open("r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.endswith("\n"):
                    break  # torn final line from a crash mid-write; entry was never acked
                try:
                    entry = json.loads(line)
                except json.JSONDecodeError:
                    raise IntegrityError(f"{self.path}:{line_no}: undecodable log line") from None
                if entry.get("seq") != self._seq + 1:
                    raise IntegrityError(
                        f"{self.path}:{line_no}: seq {entry.get('seq')} breaks gap-free order"
                    )
                self._seq += 1
                self._apply(entry)

    def _apply(self, entry: dict) -> None:
        if "amends" in entry:
            view = self._events.get(entry["amends"])
            if view is not None:
                view.update(entry.get("patch", {}))
            return
        event = dict(entry["event"])
        event["seq"] = entry["seq"]
        self._events[event["event_id"]] = event
        self._order.append(event["event_id"])

    def _write(self, entry: dict) -> None:
        try:
            self._fh.write(json.dumps(entry, separators=(",", ":")) + "\n")
            self._fh.flush()
            if self._fsync:
                os.fsync(self._fh.fileno())
        except (OSError, ValueError) as e:  # ValueError: operation on a closed/lost handle
            raise StorageFull(f"event log append failed: {e}") from None

    def append_event(self, event_payload: dict) -> int:
        """Durably append a detection event; returns its sequence number."""
        with self._lock:
            self._seq += 1
            entry = {"seq": self._seq, "ts": round(time.time(), 3), "event": event_payload}
            self._write(entry)
            self._apply(entry)
            return self._seq

    def append_amendment(self, event_id: str, patch: dict) -> int:
        with self._lock:
            if event_id not in self._events:
                raise NotFound(f"no event {event_id!r} to amend")
            self._seq += 1
            entry = {
                "seq": self._seq,
                "ts": round(time.time(), 3),
                "amends": event_id,
                "patch": patch,
            }
            self._write(entry)
            self._apply(entry)
            return self._seq

    @property
    def last_seq(self) -> int:
        with self._lock:
            return self._seq

    def get(self, event_id: str) -> dict | None:
        with self._lock:
            view = self._events.get(event_id)
            return dict(view) if view is not None else None

    def query(
        self,
        since_seq: int = 0,
        predicted_class: str | None = None,
        severity: str | None = None,
        limit: int = 100,
    ) -> list[dict]:
        """Merged event views matching all filters, ascending seq."""
        if limit < 1 or limit > MAX_QUERY_LIMIT:
            raise BadFilter(f"limit must be in [1, {MAX_QUERY_LIMIT}], got {limit}")
        if severity is not None and severity not in SEVERITY_RANK:
            raise BadFilter(f"unknown severity {severity!r}")
        out: list[dict] = []
        with self._lock:
            for event_id in self._order:
                view = self._events[event_id]
                if view["seq"] <= since_seq:
                    continue
                if predicted_class is not None and view["prediction"]["predicted_class"] != predicted_class:
                    continue
                if severity is not None and view["severity"] != severity:
                    continue
                out.append(dict(view))
                if len(out) >= limit:
                    break
        return out

    def close(self) -> None:
        self._fh.close()

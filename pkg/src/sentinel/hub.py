"""Broadcast hub feeding live WebSocket clients.

One global broadcaster, one bounded queue per connection. A client that
stops draining its queue is disconnected once the buffer overflows, so
fan-out memory stays bounded no matter how slow a client is.
"""

from __future__ import annotations

import queue
import threading

LIVE_MESSAGE_TYPES = ("detection", "attribution_update", "explanation_update", "alert", "stats")


class HubConnection:
    def __init__(self, conn_id: int, buffer_size: int):
        self.conn_id = conn_id
        self._queue: queue.Queue[dict] = queue.Queue(maxsize=buffer_size)
        self.overflowed = threading.Event()

    def offer(self, message: dict) -> bool:
        try:
            self._queue.put_nowait(message)
            return True
        except queue.Full:
            self.overflowed.set()
            return False

    def get(self, timeout_s: float = 0.1) -> dict | None:
        try:
            return self._queue.get(timeout=timeout_s)
        except queue.Empty:
            return None


class BroadcastHub:
    def __init__(self, buffer_size: int = 1000):
        self._buffer_size = buffer_size
        self._lock = threading.Lock()
        self._next_conn = 0
        self._seq = 0
        self._connections: dict[int, HubConnection] = {}

    def register(self) -> HubConnection:
        with self._lock:
            conn = HubConnection(self._next_conn, self._buffer_size)
            self._connections[self._next_conn] = conn
            self._next_conn += 1
            return conn

    def unregister(self, conn: HubConnection) -> None:
        with self._lock:
            self._connections.pop(conn.conn_id, None)

    @property
    def connection_count(self) -> int:
        with self._lock:
            return len(self._connections)

    def broadcast(self, message_type: str, payload: dict) -> int:
        """Queue {type, payload, seq} to every live connection; returns seq."""
        if message_type not in LIVE_MESSAGE_TYPES:
            raise ValueError(f"unknown live message type {message_type!r}")
        with self._lock:
            self._seq += 1
            message = {"type": message_type, "payload": payload, "seq": self._seq}
            dead = [c for c in self._connections.values() if not c.offer(message)]
            for conn in dead:
                self._connections.pop(conn.conn_id, None)
        return self._seq

"""ULID-style identifiers: time-sortable, unique, 26-char Crockford base32."""

from __future__ import annotations

import secrets
import threading
import time

_ALPHABET = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"  # ascending ASCII, so string order == numeric order


def _encode(value: int) -> str:
    chars = []
    for shift in range(125, -1, -5):
        chars.append(_ALPHABET[(value >> shift) & 31])
    return "".join(chars)


class UlidFactory:
    """Monotonic ULID generator: ids within one process always sort in issue order."""

    def __init__(self):
        self._lock = threading.Lock()
        self._last_ms = -1
        self._last_rand = 0

    def new(self, ts_ms: int | None = None) -> str:
        with self._lock:
            now_ms = int(time.time() * 1000) if ts_ms is None else ts_ms
            if now_ms <= self._last_ms:
                # same or rewound millisecond: bump randomness to stay sortable
                self._last_rand += 1
            else:
                self._last_ms = now_ms
                self._last_rand = secrets.randbits(80)
            return _encode((self._last_ms << 80) | (self._last_rand & ((1 << 80) - 1)))


_default_factory = UlidFactory()


def new_ulid() -> str:
    return _default_factory.new()

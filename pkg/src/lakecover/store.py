"""In-memory object store with read accounting, optionally mirrored to a directory.

Every ``get`` is one remote read in the cost model.  Listing and timestamp
lookups are metadata operations and are never counted.
"""

from __future__ import annotations

import bisect
import os
import threading
import time
from pathlib import Path

from .errors import NotFoundError

ENV_ROOT = "LAKECOVER_STORE"
ENV_LATENCY = "LAKECOVER_LATENCY_US"
_LOG_NAME = ".store-log"


class ObjectStore:
    def __init__(self, latency_us: float = 0, root: str | os.PathLike | None = None):
        self.latency_us = latency_us
        self.root = Path(root) if root is not None else None
        self._objects: dict[str, bytes | None] = {}
        self._created: dict[str, int] = {}
        # creation log in tick order; stale rows are filtered on read
        self._order_ticks: list[int] = []
        self._order_keys: list[str] = []
        self._tick = 0
        self._reads = 0
        self._lock = threading.Lock()
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
            self._replay_log()

    @classmethod
    def from_env(cls, root=None, latency_us=None) -> "ObjectStore":
        root = root if root is not None else os.environ.get(ENV_ROOT)
        if latency_us is None:
            latency_us = float(os.environ.get(ENV_LATENCY, 0))
        return cls(latency_us=latency_us, root=root)

    def _replay_log(self):
        log = self.root / _LOG_NAME
        if not log.exists():
            return
        for line in log.read_text(encoding="utf-8").splitlines():
            op, tick, key = line.split("\t", 2)
            tick = int(tick)
            self._tick = max(self._tick, tick)
            if op == "put":
                self._objects[key] = None  # loaded lazily
                self._created[key] = tick
                self._order_ticks.append(tick)
                self._order_keys.append(key)
            else:
                self._objects.pop(key, None)
                self._created.pop(key, None)

    def _append_log(self, op: str, tick: int, key: str):
        with open(self.root / _LOG_NAME, "a", encoding="utf-8") as fh:
            fh.write(f"{op}\t{tick}\t{key}\n")

    def _path(self, key: str) -> Path:
        path = (self.root / key).resolve()
        if self.root.resolve() not in path.parents:
            raise ValueError(f"key escapes store root: {key!r}")
        return path

    @property
    def tick(self) -> int:
        """Latest tick issued (0 before the first put)."""
        return self._tick

    @property
    def reads(self) -> int:
        return self._reads

    def reset_reads(self) -> int:
        with self._lock:
            old, self._reads = self._reads, 0
        return old

    def put(self, key: str, data: bytes) -> int:
        if not key:
            raise ValueError("object key must be non-empty")
        data = bytes(data)
        with self._lock:
            self._tick += 1
            tick = self._tick
            self._objects[key] = data
            self._created[key] = tick
            self._order_ticks.append(tick)
            self._order_keys.append(key)
            if self.root is not None:
                path = self._path(key)
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_bytes(data)
                self._append_log("put", tick, key)
        return tick

    def get(self, key: str) -> bytes:
        with self._lock:
            if key not in self._objects:
                raise NotFoundError(key)
            data = self._objects[key]
            if data is None:
                data = self._path(key).read_bytes()
                self._objects[key] = data
            self._reads += 1
        if self.latency_us:
            time.sleep(self.latency_us / 1e6)
        return data

    def delete(self, key: str) -> bool:
        with self._lock:
            if key not in self._objects:
                return False
            del self._objects[key]
            del self._created[key]
            if self.root is not None:
                self._append_log("del", self._tick, key)
                try:
                    self._path(key).unlink()
                except FileNotFoundError:
                    pass
        return True

    def exists(self, key: str) -> bool:
        return key in self._objects

    def created_at(self, key: str) -> int:
        try:
            return self._created[key]
        except KeyError:
            raise NotFoundError(key) from None

    def list(self, prefix: str = "") -> list[str]:
        with self._lock:
            return sorted(k for k in self._objects if k.startswith(prefix))

    def files_created_after(self, prefix: str, ts: int) -> set[str]:
        with self._lock:
            start = bisect.bisect_right(self._order_ticks, ts)
            created = self._created
            return {
                k
                for t, k in zip(self._order_ticks[start:], self._order_keys[start:])
                if created.get(k) == t and k.startswith(prefix)
            }


class CountingStore:
    """Wraps a store and counts ``get`` calls independently of its own counter."""

    def __init__(self, inner: ObjectStore):
        self.inner = inner
        self.get_calls = 0

    def get(self, key):
        self.get_calls += 1
        return self.inner.get(key)

    def __getattr__(self, name):
        return getattr(self.inner, name)

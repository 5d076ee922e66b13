"""Shared test doubles."""

from __future__ import annotations

import threading


class DictIndex:
    """Hash-map index double: correct, fast, no tree mechanics."""

    def __init__(self) -> None:
        self._d: dict[int, int] = {}
        self._lock = threading.Lock()

    def get(self, key):
        return self._d.get(key)

    def put_if_absent(self, key, value):
        with self._lock:
            if key in self._d:
                return self._d[key]
            self._d[key] = value
            return None

    def remove(self, key):
        with self._lock:
            return self._d.pop(key, None)

    def size(self) -> int:
        return len(self._d)

    def keys(self):
        return sorted(self._d)

    def close(self) -> None:
        pass


class RecordingIndex(DictIndex):
    """Records the kind of each operation issued against it."""

    def __init__(self) -> None:
        super().__init__()
        self.trace: list[str] = []
        self.keys_seen: list[int] = []

    def get(self, key):
        self.trace.append("G")
        self.keys_seen.append(key)
        return super().get(key)

    def put_if_absent(self, key, value):
        self.trace.append("I")
        self.keys_seen.append(key)
        return super().put_if_absent(key, value)

    def remove(self, key):
        self.trace.append("R")
        self.keys_seen.append(key)
        return super().remove(key)

"""Shared vocabulary: parameters, the index contract, statistics, seeding."""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from typing import Optional, Protocol, runtime_checkable

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class BenchmarkParameters:
    """Obligatory knobs shared by every workload.

    The key universe is ``[0, key_range)``; ``initial_size`` keys are inserted
    before the measured phase starts.
    """

    key_range: int
    initial_size: int
    worker_threads: int = 1
    prefill_threads: int = 1
    duration_ms: int = 1000
    seed: int = 42
    repeats: int = 1

    def __post_init__(self) -> None:
        if self.key_range <= 0:
            raise ValueError("key range must be positive")
        if self.initial_size < 0:
            raise ValueError("initial size must be non-negative")
        if self.initial_size > self.key_range:
            raise ValueError("initial size exceeds range")
        if self.worker_threads <= 0:
            raise ValueError("worker thread count must be positive")
        if self.prefill_threads <= 0:
            raise ValueError("prefill thread count must be positive")
        if self.duration_ms <= 0:
            raise ValueError("duration must be positive")
        if self.repeats <= 0:
            raise ValueError("repeat count must be positive")


@runtime_checkable
class ConcurrentIndex(Protocol):
    """The structure under test: an integer key-value map.

    All three operations must be linearizable under concurrent invocation;
    ``size`` is meaningful only at quiescence.
    """

    def get(self, key: int) -> Optional[int]: ...

    def put_if_absent(self, key: int, value: int) -> Optional[int]: ...

    def remove(self, key: int) -> Optional[int]: ...

    def size(self) -> int: ...


@dataclass
class ThreadStats:
    """Per-thread operation counters, written only by the owning thread."""

    gets_attempted: int = 0
    gets_hit: int = 0
    inserts_attempted: int = 0
    inserts_succeeded: int = 0
    removes_attempted: int = 0
    removes_succeeded: int = 0
    elapsed_ms: float = 0.0

    @property
    def total_ops(self) -> int:
        return self.gets_attempted + self.inserts_attempted + self.removes_attempted


@dataclass
class AggregateStats:
    """Sum of all worker counters plus the structure-level balance check."""

    per_thread: list[ThreadStats]
    wall_ms: float
    throughput_ops_per_sec: float
    final_size: int = 0
    expected_size: int = 0

    @property
    def total_ops(self) -> int:
        return sum(s.total_ops for s in self.per_thread)

    @property
    def inserts_succeeded(self) -> int:
        return sum(s.inserts_succeeded for s in self.per_thread)

    @property
    def removes_succeeded(self) -> int:
        return sum(s.removes_succeeded for s in self.per_thread)


def aggregate(
    stats: list[ThreadStats],
    wall_ms: float,
    initial_size: int = 0,
    final_size: int = 0,
) -> AggregateStats:
    """Sum per-thread counters into run-level statistics.

    Throughput counts every attempted operation, successful or not; successes
    are reported separately in the per-kind counters.
    """
    if not stats:
        raise ValueError("stats list must be non-empty")
    if wall_ms <= 0:
        raise ValueError("wall time must be positive")
    total = sum(s.total_ops for s in stats)
    expected = initial_size + sum(s.inserts_succeeded - s.removes_succeeded for s in stats)
    return AggregateStats(
        per_thread=list(stats),
        wall_ms=wall_ms,
        throughput_ops_per_sec=total / (wall_ms / 1000.0),
        final_size=final_size,
        expected_size=expected,
    )


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def seeded_rng(seed: int, thread_id: int) -> random.Random:
    """Deterministic per-(seed, thread) random stream.

    Child seeds are derived by splitmix64 mixing so streams for different
    thread ids (or seeds) are statistically independent while remaining
    reproducible.
    """
    child = _splitmix64(_splitmix64(seed & _MASK64) ^ _splitmix64((thread_id & _MASK64) + 0x632BE59BD9B4E019))
    return random.Random(child)


class AtomicCounter:
    """A fetch-and-add counter shared between threads."""

    __slots__ = ("_lock", "_value")

    def __init__(self, initial: int = 0) -> None:
        self._lock = threading.Lock()
        self._value = initial

    @property
    def value(self) -> int:
        return self._value

    def fetch_add(self, delta: int = 1) -> int:
        """Add ``delta`` and return the value seen *before* the addition."""
        with self._lock:
            old = self._value
            self._value = old + delta
            return old

    def add_and_get(self, delta: int = 1) -> int:
        with self._lock:
            self._value += delta
            return self._value

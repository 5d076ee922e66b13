"""Operation selection loops, the concurrent prefill protocol, and phase driving."""

from __future__ import annotations

import random
import threading
import time
from dataclasses import dataclass

from skewbench.core import AggregateStats, ConcurrentIndex, ThreadStats, aggregate
from skewbench.keygen import KeyGenerator

THREADLOOP_IDS = ("default", "temporary-operations")


@dataclass(frozen=True)
class OperationMix:
    """Insert/remove fractions; the remainder of the probability mass is reads."""

    insert_fraction: float
    remove_fraction: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.insert_fraction <= 1.0:
            raise ValueError("insert fraction must be in [0, 1]")
        if not 0.0 <= self.remove_fraction <= 1.0:
            raise ValueError("remove fraction must be in [0, 1]")
        if self.insert_fraction + self.remove_fraction > 1.0 + 1e-12:
            raise ValueError("insert and remove fractions must sum to at most 1")

    @property
    def read_fraction(self) -> float:
        return 1.0 - self.insert_fraction - self.remove_fraction


@dataclass(frozen=True)
class TemporaryOperationsParameters:
    """A cyclic schedule of operation mixes, durations in operations."""

    durations: tuple[int, ...]
    mixes: tuple[OperationMix, ...]

    def __post_init__(self) -> None:
        if len(self.durations) < 1:
            raise ValueError("at least one interval is required")
        if len(self.durations) != len(self.mixes):
            raise ValueError(
                f"expected {len(self.durations)} mixes, got {len(self.mixes)}"
            )
        for d in self.durations:
            if d < 1:
                raise ValueError("interval durations must be at least 1")

    @property
    def interval_count(self) -> int:
        return len(self.durations)


class PrefillCounter:
    """Shared remaining-keys counter with atomic increment/decrement.

    The decrement happens before the negativity check, so transient negative
    values are possible; the compensating increment restores them.
    """

    __slots__ = ("_lock", "_value")

    def __init__(self, initial: int) -> None:
        self._lock = threading.Lock()
        self._value = initial

    @property
    def value(self) -> int:
        return self._value

    def decrement_and_get(self) -> int:
        with self._lock:
            self._value -= 1
            return self._value

    def increment_and_get(self) -> int:
        with self._lock:
            self._value += 1
            return self._value


class ThreadLoop:
    """Per-thread operation selector + executor + statistics recorder."""

    def __init__(
        self,
        keygen: KeyGenerator,
        index: ConcurrentIndex,
        rng: random.Random,
        stop_event: threading.Event,
    ) -> None:
        self.keygen = keygen
        self.index = index
        self.rng = rng
        self.stop_event = stop_event
        self.stats = ThreadStats()

    def _current_mix(self) -> OperationMix:
        raise NotImplementedError

    def step(self) -> None:
        """Draw one operation per the current mix, execute it, record stats."""
        mix = self._current_mix()
        u = self.rng.random()
        stats = self.stats
        if u < mix.insert_fraction:
            key = self.keygen.next_insert()
            stats.inserts_attempted += 1
            if self.index.put_if_absent(key, key) is None:
                stats.inserts_succeeded += 1
        elif u < mix.insert_fraction + mix.remove_fraction:
            key = self.keygen.next_remove()
            stats.removes_attempted += 1
            if self.index.remove(key) is not None:
                stats.removes_succeeded += 1
        else:
            key = self.keygen.next_get()
            stats.gets_attempted += 1
            if self.index.get(key) is not None:
                stats.gets_hit += 1

    def run(self) -> None:
        """Loop until the shared stop flag is set; the operation in flight at
        expiry completes and is counted."""
        start = time.perf_counter()
        stop = self.stop_event
        while not stop.is_set():
            self.step()
        self.stats.elapsed_ms = (time.perf_counter() - start) * 1000.0

    def prefill(self, counter: PrefillCounter) -> None:
        """Concurrent prefill with a compensating shared counter: decrement,
        insert, and give the ticket back if the decrement overshot or the key
        was already present. At completion the structure holds exactly the
        requested number of keys."""
        keygen = self.keygen
        index = self.index
        while counter.value > 0:
            cur = counter.decrement_and_get()
            key = keygen.next_prefill()
            if cur < 0 or index.put_if_absent(key, key) is not None:
                counter.increment_and_get()


class DefaultThreadLoop(ThreadLoop):
    """Fixed operation mix for the whole run."""

    def __init__(self, mix: OperationMix, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.mix = mix

    def _current_mix(self) -> OperationMix:
        return self.mix


class TemporaryOperationsThreadLoop(ThreadLoop):
    """Mix follows a cyclic per-thread interval schedule, advanced per operation."""

    def __init__(self, params: TemporaryOperationsParameters, *args, **kwargs) -> None:
        super().__init__(*args, **kwargs)
        self.params = params
        self._interval = 0
        self._ops_left = params.durations[0]

    def _current_mix(self) -> OperationMix:
        return self.params.mixes[self._interval]

    def step(self) -> None:
        super().step()
        self._ops_left -= 1
        if self._ops_left <= 0:
            self._interval = (self._interval + 1) % self.params.interval_count
            self._ops_left = self.params.durations[self._interval]


def run_prefill(
    index: ConcurrentIndex,
    loops: list[ThreadLoop],
    initial_size: int,
) -> None:
    """Run the prefill protocol across the given loops (one thread each)."""
    if initial_size == 0:
        return
    counter = PrefillCounter(initial_size)
    if len(loops) == 1:
        loops[0].prefill(counter)
        return
    threads = [threading.Thread(target=loop.prefill, args=(counter,)) for loop in loops]
    for t in threads:
        t.start()
    for t in threads:
        t.join()


class WorkerFailure(RuntimeError):
    """A worker thread terminated abnormally during the measured phase."""


def run_measured_phase(
    loops: list[ThreadLoop],
    duration_ms: int,
    initial_size: int = 0,
    final_size: int = 0,
) -> AggregateStats:
    """Launch all loops simultaneously (barrier start), stop after
    ``duration_ms``, join, and aggregate statistics."""
    if not loops:
        raise ValueError("at least one thread loop is required")
    stop = loops[0].stop_event
    barrier = threading.Barrier(len(loops) + 1)
    errors: list[BaseException] = []

    def worker(loop: ThreadLoop) -> None:
        try:
            barrier.wait()
            loop.run()
        except BaseException as exc:  # noqa: BLE001 - re-raised after join
            errors.append(exc)
            stop.set()

    threads = [threading.Thread(target=worker, args=(loop,)) for loop in loops]
    for t in threads:
        t.start()
    barrier.wait()
    start = time.perf_counter()
    stop.wait(duration_ms / 1000.0)
    stop.set()
    for t in threads:
        t.join()
    wall_ms = (time.perf_counter() - start) * 1000.0
    if errors:
        raise WorkerFailure(f"{len(errors)} worker(s) failed: {errors[0]!r}") from errors[0]
    return aggregate([loop.stats for loop in loops], wall_ms, initial_size, final_size)

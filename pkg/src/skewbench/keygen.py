"""Per-operation key sources.

Five generators: Default, Skewed Sets, Temporary Skewed, Creakers and Wave,
Leafs Handshake. One generator instance per worker thread; shared state
(KeyGeneratorData, wave cursors, the last-removed cell) is passed in
explicitly and is either immutable or atomic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from skewbench.core import AtomicCounter, ConcurrentIndex
from skewbench.distributions import (
    Distribution,
    MutableDistribution,
    UniformDistribution,
    ZipfianDistribution,
)
from skewbench.keygen_data import KeyGeneratorData

KEYGEN_IDS = (
    "default",
    "skewed-sets",
    "temporary-skewed",
    "creakers-and-wave",
    "leafs-handshake",
)


class KeyGenerator:
    """Key source with one method per operation kind."""

    def next_get(self) -> int:
        raise NotImplementedError

    def next_insert(self) -> int:
        raise NotImplementedError

    def next_remove(self) -> int:
        raise NotImplementedError

    def next_prefill(self) -> int:
        raise NotImplementedError


class DefaultKeyGenerator(KeyGenerator):
    """Feeds one distribution through the shared data for every operation kind.

    Prefill draws from a dedicated uniform stream so the prefilled set is a
    uniform random subset regardless of how skewed the workload distribution
    is (a narrow hot set would otherwise make exact-size prefill crawl).
    """

    def __init__(self, data: KeyGeneratorData, dist: Distribution, prefill_rng: random.Random) -> None:
        self._data = data
        self._dist = dist
        self._prefill_rng = prefill_rng

    def next_get(self) -> int:
        return self._data.get(self._dist.next())

    next_insert = next_get
    next_remove = next_get

    def next_prefill(self) -> int:
        return self._data.get(self._prefill_rng.randrange(self._data.range_size))


@dataclass(frozen=True)
class SkewedSetsParameters:
    """Separate hot sets for reads and updates with controlled overlap.

    ``intersection`` is the fraction of the smaller hot set shared between the
    read-hot and write-hot key subsets.
    """

    read_hot_prob: float
    read_hot_size: float
    write_hot_prob: float
    write_hot_size: float
    intersection: float

    def __post_init__(self) -> None:
        for name in ("read_hot_prob", "read_hot_size", "write_hot_prob", "write_hot_size", "intersection"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")


class SkewedSetsKeyGenerator(KeyGenerator):
    """Two skewed-uniform samplers over one shared shuffled data.

    Layout over data indices: read-hot block = ``[0, R)``, write-hot block =
    ``[R - V, R - V + W)`` where ``V = floor(inter * min(R, W))``. Contiguous
    index blocks over a shuffled permutation give random key subsets with
    exact overlap control.
    """

    def __init__(
        self,
        params: SkewedSetsParameters,
        data: KeyGeneratorData,
        rng: random.Random,
        prefill_rng: random.Random,
    ) -> None:
        n = data.range_size
        r = int(params.read_hot_size * n)
        w = int(params.write_hot_size * n)
        v = int(params.intersection * min(r, w))
        if r == 0 and params.read_hot_prob > 0.0:
            raise ValueError("empty read-hot set cannot be sampled")
        if r == n and params.read_hot_prob < 1.0:
            raise ValueError("empty read-cold set cannot be sampled")
        if w == 0 and params.write_hot_prob > 0.0:
            raise ValueError("empty write-hot set cannot be sampled")
        if w == n and params.write_hot_prob < 1.0:
            raise ValueError("empty write-cold set cannot be sampled")
        if r - v + w > n:
            raise ValueError("read and write hot sets exceed the range; raise intersection or shrink the sets")
        self._data = data
        self._rng = rng
        self._prefill_rng = prefill_rng
        self._n = n
        self._read_hot_len = r
        self._read_hot_prob = params.read_hot_prob
        self._write_lo = r - v
        self._write_hot_len = w
        self._write_hot_prob = params.write_hot_prob

    def next_get(self) -> int:
        rng = self._rng
        if rng.random() < self._read_hot_prob:
            return self._data.get(rng.randrange(self._read_hot_len))
        return self._data.get(self._read_hot_len + rng.randrange(self._n - self._read_hot_len))

    def _next_update(self) -> int:
        rng = self._rng
        if rng.random() < self._write_hot_prob:
            return self._data.get(self._write_lo + rng.randrange(self._write_hot_len))
        c = rng.randrange(self._n - self._write_hot_len)
        if c >= self._write_lo:
            c += self._write_hot_len
        return self._data.get(c)

    next_insert = _next_update
    next_remove = _next_update

    def next_prefill(self) -> int:
        return self._data.get(self._prefill_rng.randrange(self._n))


@dataclass(frozen=True)
class TemporarySkewedParameters:
    """A cyclic schedule of excited states separated by dormant states.

    During excited state ``i`` a fraction ``hot_probs[i]`` of operations hits
    a hot block of ``hot_sizes[i]`` of the keys, for ``hot_times[i]``
    operations; the following dormant state is uniform over the whole range
    for ``relax_times[i]`` operations. Durations are counted per thread.
    """

    state_count: int
    hot_probs: tuple[float, ...]
    hot_sizes: tuple[float, ...]
    hot_times: tuple[int, ...]
    relax_times: tuple[int, ...]

    @classmethod
    def with_defaults(
        cls,
        state_count: int,
        hot_probs: list[float],
        hot_sizes: list[float],
        hot_time: int = 1000,
        relax_time: int = 1000,
        hot_times: Optional[list[int]] = None,
        relax_times: Optional[list[int]] = None,
    ) -> "TemporarySkewedParameters":
        hts = hot_times if hot_times is not None else [hot_time] * state_count
        rts = relax_times if relax_times is not None else [relax_time] * state_count
        return cls(state_count, tuple(hot_probs), tuple(hot_sizes), tuple(hts), tuple(rts))

    def __post_init__(self) -> None:
        if self.state_count < 1:
            raise ValueError("state count must be at least 1")
        for name in ("hot_probs", "hot_sizes", "hot_times", "relax_times"):
            seq = getattr(self, name)
            if len(seq) != self.state_count:
                raise ValueError(f"{name}: expected {self.state_count} values, got {len(seq)}")
        for p in self.hot_probs:
            if not 0.0 <= p <= 1.0:
                raise ValueError("hot probabilities must be in [0, 1]")
        for s in self.hot_sizes:
            if not 0.0 <= s <= 1.0:
                raise ValueError("hot sizes must be in [0, 1]")
        for t in (*self.hot_times, *self.relax_times):
            if t < 0:
                raise ValueError("state durations must be non-negative")
        if all(t == 0 for t in (*self.hot_times, *self.relax_times)):
            raise ValueError("all state durations are zero")


class TemporarySkewedKeyGenerator(KeyGenerator):
    """Per-thread state machine over excited/dormant phases.

    Hot blocks for distinct states are packed consecutively (wrapping over
    the range) so different states stress different keys. The complement of a
    cyclic block is itself cyclic, so cold sampling is a single offset.
    """

    def __init__(
        self,
        params: TemporarySkewedParameters,
        data: KeyGeneratorData,
        rng: random.Random,
        prefill_rng: random.Random,
    ) -> None:
        n = data.range_size
        lens = [int(s * n) for s in params.hot_sizes]
        offsets = []
        off = 0
        for length in lens:
            offsets.append(off)
            off = (off + length) % n
        for i, length in enumerate(lens):
            if length == 0 and params.hot_probs[i] > 0.0:
                raise ValueError(f"state {i}: empty hot set cannot be sampled")
            if length == n and params.hot_probs[i] < 1.0:
                raise ValueError(f"state {i}: empty cold set cannot be sampled")
        self._params = params
        self._data = data
        self._rng = rng
        self._prefill_rng = prefill_rng
        self._n = n
        self._lens = lens
        self._offsets = offsets
        self._state = 0
        self._dormant = False
        self._ops_left = 0
        self._enter(0, dormant=False)

    def _enter(self, state: int, dormant: bool) -> None:
        # Skip zero-length phases; the parameter validation guarantees the
        # cycle contains at least one positive duration.
        params = self._params
        while True:
            duration = params.relax_times[state] if dormant else params.hot_times[state]
            if duration > 0:
                self._state = state
                self._dormant = dormant
                self._ops_left = duration
                return
            if dormant:
                state = (state + 1) % params.state_count
                dormant = False
            else:
                dormant = True

    @property
    def phase(self) -> tuple[str, int]:
        """('excited'|'dormant', state index) — the phase of the *next* operation."""
        return ("dormant" if self._dormant else "excited", self._state)

    def _advance(self) -> None:
        self._ops_left -= 1
        if self._ops_left > 0:
            return
        if self._dormant:
            self._enter((self._state + 1) % self._params.state_count, dormant=False)
        else:
            self._enter(self._state, dormant=True)

    def _sample(self) -> int:
        rng = self._rng
        n = self._n
        if self._dormant:
            index = rng.randrange(n)
        else:
            i = self._state
            length = self._lens[i]
            if rng.random() < self._params.hot_probs[i]:
                index = (self._offsets[i] + rng.randrange(length)) % n
            else:
                index = (self._offsets[i] + length + rng.randrange(n - length)) % n
        self._advance()
        return self._data.get(index)

    next_get = _sample
    next_insert = _sample
    next_remove = _sample

    def next_prefill(self) -> int:
        return self._data.get(self._prefill_rng.randrange(self._n))


@dataclass(frozen=True)
class CreakersWaveParameters:
    """Creakers: a small, rarely-but-permanently requested key subset.
    Wave: a cyclically advancing window of recently inserted keys."""

    creaker_prob: float
    creaker_size: float
    wave_size: float
    creaker_age: int = 0
    wave_alpha: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.creaker_prob <= 1.0:
            raise ValueError("creaker probability must be in [0, 1]")
        if not 0.0 <= self.creaker_size <= 1.0:
            raise ValueError("creaker size must be in [0, 1]")
        if not 0.0 <= self.wave_size <= 1.0:
            raise ValueError("wave size must be in [0, 1]")
        if self.creaker_size + self.wave_size > 1.0:
            raise ValueError("creaker and wave sizes must sum to at most 1")
        if self.creaker_age < 0:
            raise ValueError("creaker age must be non-negative")


class WaveState:
    """Wave cursors shared by all threads.

    ``head`` and ``tail`` grow monotonically; positions live in the
    non-creaker region and are taken modulo its size, so the Wave moves
    cyclically. The wave holds positions ``[tail, head)``.
    """

    def __init__(self, region_size: int, head: int, tail: int = 0) -> None:
        self.region_size = region_size
        self.head = AtomicCounter(head)
        self.tail = AtomicCounter(tail)

    @property
    def size(self) -> int:
        return self.head.value - self.tail.value


class CreakersWaveShared:
    """Per-run shared state: data layout, wave cursors, prefill cursor.

    Creakers occupy the last ``floor(cs * range)`` indices of the data array;
    the wave region is the remaining prefix, traversed cyclically. The
    initial wave is positions ``[0, wave_len)`` ending at the head.
    """

    def __init__(self, params: CreakersWaveParameters, data: KeyGeneratorData) -> None:
        n = data.range_size
        creaker_len = int(params.creaker_size * n)
        wave_len = int(params.wave_size * n)
        region_size = n - creaker_len
        if params.creaker_prob > 0.0 and creaker_len == 0:
            raise ValueError("empty creaker set cannot be sampled")
        if params.creaker_age > 0 and creaker_len == 0:
            raise ValueError("creaker warmup requested with no creakers")
        if params.creaker_prob < 1.0 and region_size == 0:
            raise ValueError("empty wave region cannot be sampled")
        if wave_len == 0 and params.creaker_prob < 1.0:
            raise ValueError("initial wave is empty; raise wave_size")
        self.params = params
        self.data = data
        self.creaker_len = creaker_len
        self.wave_len = wave_len
        self.region_size = region_size
        self.wave = WaveState(region_size, head=wave_len)
        self.prefill_cursor = AtomicCounter(0)

    @property
    def initial_size(self) -> int:
        return self.creaker_len + self.wave_len

    def creaker_key(self, j: int) -> int:
        return self.data.get(self.region_size + j)

    def wave_key(self, position: int) -> int:
        return self.data.get(position % self.region_size)


class CreakersWaveKeyGenerator(KeyGenerator):
    """Removes consume the wave tail, inserts extend the head, reads favor
    keys close behind the head (mutable Zipfian over the current wave size)."""

    def __init__(
        self,
        shared: CreakersWaveShared,
        rng: random.Random,
        creaker_dist: Optional[Distribution] = None,
        wave_dist: Optional[MutableDistribution] = None,
    ) -> None:
        self._shared = shared
        self._rng = rng
        if creaker_dist is None and shared.creaker_len > 0:
            creaker_dist = UniformDistribution(shared.creaker_len, rng)
        self._creaker_dist = creaker_dist
        if wave_dist is None:
            wave_dist = ZipfianDistribution(shared.params.wave_alpha, max(shared.wave_len, 1), rng)
        self._wave_dist = wave_dist

    def _read_key(self) -> int:
        shared = self._shared
        if shared.creaker_len and self._rng.random() < shared.params.creaker_prob:
            return shared.creaker_key(self._creaker_dist.next())
        wave = shared.wave
        size = wave.head.value - wave.tail.value
        if size < 1:
            size = 1
        elif size > shared.region_size:
            size = shared.region_size
        offset = self._wave_dist.next(size)
        return shared.wave_key(wave.head.value - 1 - offset)

    next_get = _read_key

    def next_insert(self) -> int:
        h = self._shared.wave.head.fetch_add(1)
        return self._shared.wave_key(h)

    def next_remove(self) -> int:
        wave = self._shared.wave
        if wave.head.value - wave.tail.value <= 1:
            # Removing the last wave element would stall the run; re-sample
            # as a read without moving the tail.
            return self._read_key()
        t = wave.tail.fetch_add(1)
        return self._shared.wave_key(t)

    def next_prefill(self) -> int:
        shared = self._shared
        p = shared.prefill_cursor.fetch_add(1) % shared.initial_size
        if p < shared.creaker_len:
            return shared.creaker_key(p)
        return shared.wave_key(p - shared.creaker_len)

    def warmup(self, index: ConcurrentIndex) -> int:
        """Perform ``creaker_age`` gets on creaker keys before the measured
        phase; returns the number of gets issued (excluded from statistics)."""
        shared = self._shared
        c_age = shared.params.creaker_age
        for _ in range(c_age):
            index.get(shared.creaker_key(self._creaker_dist.next()))
        return c_age


@dataclass(frozen=True)
class LeafsHandshakeParameters:
    """Insert keys cluster around the argument of the previous remove."""

    insert_alpha: float = 1.0
    insert_window: int = 100
    per_thread: bool = False

    def __post_init__(self) -> None:
        if self.insert_alpha <= 0.0:
            raise ValueError("insert alpha must be positive")
        if self.insert_window < 1:
            raise ValueError("insert window must be at least 1")


class LastRemovedCell:
    """A single shared cell; relaxed read/write (stale reads acceptable)."""

    __slots__ = ("value",)

    def __init__(self, value: int) -> None:
        self.value = value


class LeafsHandshakeKeyGenerator(KeyGenerator):
    """Removes publish their key; inserts land at ``last_removed ± d`` with
    offsets ``d >= 1`` drawn from a mutable distribution over a small window,
    direction uniform, wrapped into the key range."""

    def __init__(
        self,
        params: LeafsHandshakeParameters,
        data: KeyGeneratorData,
        rng: random.Random,
        prefill_rng: random.Random,
        shared_cell: Optional[LastRemovedCell] = None,
        get_dist: Optional[Distribution] = None,
        remove_dist: Optional[Distribution] = None,
        insert_dist: Optional[MutableDistribution] = None,
        fixed_direction: Optional[int] = None,
    ) -> None:
        n = data.range_size
        self._data = data
        self._rng = rng
        self._prefill_rng = prefill_rng
        self._n = n
        if shared_cell is None or params.per_thread:
            shared_cell = LastRemovedCell(n // 2)
        self._cell = shared_cell
        self._get_dist = get_dist if get_dist is not None else UniformDistribution(n, rng)
        self._remove_dist = remove_dist if remove_dist is not None else UniformDistribution(n, rng)
        if insert_dist is None:
            insert_dist = ZipfianDistribution(params.insert_alpha, params.insert_window, rng)
        self._insert_dist = insert_dist
        self._window = params.insert_window
        self._fixed_direction = fixed_direction

    def next_get(self) -> int:
        return self._data.get(self._get_dist.next())

    def next_remove(self) -> int:
        key = self._data.get(self._remove_dist.next())
        self._cell.value = key
        return key

    def next_insert(self) -> int:
        base = self._cell.value
        d = self._insert_dist.next(self._window) + 1
        if self._fixed_direction is not None:
            direction = self._fixed_direction
        else:
            direction = 1 if self._rng.random() < 0.5 else -1
        return (base + direction * d) % self._n

    def next_prefill(self) -> int:
        return self._data.get(self._prefill_rng.randrange(self._n))

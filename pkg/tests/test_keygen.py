import threading
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewbench.core import seeded_rng
from skewbench.distributions import (
    MutableDistribution,
    UniformDistribution,
    ZipfianDistribution,
    zipf_pmf,
)
from skewbench.keygen import (
    CreakersWaveKeyGenerator,
    CreakersWaveParameters,
    CreakersWaveShared,
    DefaultKeyGenerator,
    LastRemovedCell,
    LeafsHandshakeKeyGenerator,
    LeafsHandshakeParameters,
    SkewedSetsKeyGenerator,
    SkewedSetsParameters,
    TemporarySkewedKeyGenerator,
    TemporarySkewedParameters,
    WaveState,
)
from skewbench.keygen_data import KeyGeneratorData

from conftest import DictIndex


def rngs(tid=0):
    return seeded_rng(11, tid), seeded_rng(11, tid + 1000)


class Degenerate(MutableDistribution):
    """Always returns the same index (test hook)."""

    def __init__(self, value=0):
        self.value = value

    def set_range(self, range_size):
        pass

    def next(self, range_size=None):
        return self.value


def identity(n):
    return KeyGeneratorData(n, shuffle=False)


class TestDefault:
    def test_range_one_always_zero(self):
        rng, prng = rngs()
        gen = DefaultKeyGenerator(identity(1), UniformDistribution(1, rng), prng)
        assert all(gen.next_get() == 0 for _ in range(50))
        assert gen.next_insert() == 0 and gen.next_remove() == 0

    def test_zipf_composition_pmf(self):
        rng, prng = rngs()
        gen = DefaultKeyGenerator(identity(3), ZipfianDistribution(1.0, 3, rng), prng)
        n = 200_000
        c = Counter(gen.next_get() for _ in range(n))
        for i, p in enumerate(zipf_pmf(1.0, 3)):
            assert abs(c[i] / n - p) < 0.008

    def test_shuffled_containment(self):
        rng, prng = rngs()
        data = KeyGeneratorData(100, shuffle=True, seed=4)
        gen = DefaultKeyGenerator(data, ZipfianDistribution(1.0, 100, rng), prng)
        keys = {gen.next_get() for _ in range(5_000)} | {gen.next_prefill() for _ in range(5_000)}
        assert keys <= set(range(100))


class TestSkewedSets:
    def make(self, rp, rs, wp, ws, inter, n=100, shuffle=True):
        rng, prng = rngs()
        data = KeyGeneratorData(n, shuffle=shuffle, seed=8)
        params = SkewedSetsParameters(rp, rs, wp, ws, inter)
        return SkewedSetsKeyGenerator(params, data, rng, prng), data

    def test_all_reads_hot(self):
        gen, data = self.make(1.0, 0.1, 0.5, 0.1, 0.0)
        read_hot = {data.get(i) for i in range(10)}
        assert {gen.next_get() for _ in range(3_000)} <= read_hot

    def test_full_overlap_sets_equal(self):
        gen, data = self.make(1.0, 0.1, 1.0, 0.1, 1.0)
        gets = {gen.next_get() for _ in range(5_000)}
        updates = {gen.next_insert() for _ in range(5_000)}
        assert gets == updates == {data.get(i) for i in range(10)}

    def test_disjoint_hot_sets_and_masses(self):
        gen, data = self.make(0.9, 0.1, 0.9, 0.1, 0.0, n=1000)
        read_hot = {data.get(i) for i in range(100)}
        write_hot = {data.get(i) for i in range(100, 200)}
        assert not (read_hot & write_hot)
        n = 300_000
        read_hits = sum(1 for _ in range(n) if gen.next_get() in read_hot)
        write_hits = sum(1 for _ in range(n) if gen.next_remove() in write_hot)
        assert abs(read_hits / n - 0.9) < 0.005
        assert abs(write_hits / n - 0.9) < 0.005
        # no update ever lands in read-only hot keys beyond the cold mass
        assert {gen.next_insert() for _ in range(5_000)} <= set(range(1000))

    def test_overflowing_blocks_rejected(self):
        with pytest.raises(ValueError, match="exceed the range"):
            self.make(0.5, 0.6, 0.5, 0.6, 0.0)

    def test_empty_hot_rejected(self):
        with pytest.raises(ValueError, match="read-hot"):
            self.make(0.5, 0.001, 0.5, 0.1, 0.0)


class TestTemporarySkewed:
    def make(self, **kwargs):
        rng, prng = rngs()
        n = kwargs.pop("n", 100)
        data = KeyGeneratorData(n, shuffle=False)
        params = TemporarySkewedParameters.with_defaults(**kwargs)
        return TemporarySkewedKeyGenerator(params, data, rng, prng)

    def test_degenerate_single_state(self):
        gen = self.make(state_count=1, hot_probs=[1.0], hot_sizes=[0.1], hot_time=5, relax_time=0)
        assert all(gen.next_get() < 10 for _ in range(2_000))

    def test_state_trace_two_states(self):
        gen = self.make(state_count=2, hot_probs=[0.9, 0.9], hot_sizes=[0.1, 0.1], hot_time=5, relax_time=3)
        trace = []
        for _ in range(32):
            trace.append(gen.phase)
            gen.next_get()
        cycle = [("excited", 0)] * 5 + [("dormant", 0)] * 3 + [("excited", 1)] * 5 + [("dormant", 1)] * 3
        assert trace == cycle * 2

    def test_zero_skew_avoids_hot_block(self):
        # with hot probability 0 the excited phase samples only the cold set
        gen = self.make(state_count=1, hot_probs=[0.0], hot_sizes=[0.1], hot_time=5, relax_time=0, n=20)
        assert all(gen.next_get() >= 2 for _ in range(5_000))

    def test_dormant_phase_is_uniform(self):
        from scipy import stats

        gen = self.make(state_count=1, hot_probs=[1.0], hot_sizes=[0.1], hot_time=1, relax_time=1, n=20)
        dormant = []
        for _ in range(100_000):
            phase, _ = gen.phase
            k = gen.next_get()
            if phase == "dormant":
                dormant.append(k)
        c = Counter(dormant)
        _, p = stats.chisquare([c[i] for i in range(20)])
        assert p > 0.001

    def test_arity_validation(self):
        with pytest.raises(ValueError, match="expected 2 values"):
            TemporarySkewedParameters.with_defaults(state_count=2, hot_probs=[0.9], hot_sizes=[0.1, 0.1])

    def test_all_zero_durations_rejected(self):
        with pytest.raises(ValueError, match="zero"):
            self.make(state_count=1, hot_probs=[0.5], hot_sizes=[0.1], hot_time=0, relax_time=0)

    def test_distinct_states_stress_distinct_keys(self):
        gen = self.make(state_count=2, hot_probs=[1.0, 1.0], hot_sizes=[0.2, 0.2], hot_time=50, relax_time=0, n=100)
        first = {gen.next_get() for _ in range(50)}
        second = {gen.next_get() for _ in range(50)}
        assert first <= set(range(20))
        assert second <= set(range(20, 40))


def make_wave(n=100, cp=0.0, cs=0.0, ws=0.4, c_age=0, tid=0):
    data = KeyGeneratorData(n, shuffle=False)
    shared = CreakersWaveShared(CreakersWaveParameters(cp, cs, ws, c_age), data)
    gen = CreakersWaveKeyGenerator(shared, seeded_rng(11, tid))
    return shared, gen


class TestCreakersWave:
    def test_scripted_trace(self):
        # region of 10 positions, wave occupying [2, 6)
        shared, gen = make_wave(n=10, ws=0.4)
        shared.wave = WaveState(10, head=6, tail=2)
        assert gen.next_remove() == 2
        assert shared.wave.tail.value == 3
        assert gen.next_insert() == 6
        assert shared.wave.head.value == 7

    def test_alternating_keeps_size_constant(self):
        shared, gen = make_wave(n=100, ws=0.2)
        for i in range(50):
            h0, t0 = shared.wave.head.value, shared.wave.tail.value
            gen.next_insert()
            gen.next_remove()
            assert shared.wave.head.value == h0 + 1
            assert shared.wave.tail.value == t0 + 1
            assert shared.wave.size == 20

    def test_all_creakers_when_prob_one(self):
        shared, gen = make_wave(n=100, cp=1.0, cs=0.2, ws=0.2)
        creakers = {shared.creaker_key(j) for j in range(shared.creaker_len)}
        assert {gen.next_get() for _ in range(3_000)} <= creakers

    def test_gets_stay_in_wave_when_no_creakers(self):
        shared, gen = make_wave(n=100, cp=0.0, ws=0.3)
        wave_keys = set(range(30))
        assert {gen.next_get() for _ in range(3_000)} <= wave_keys

    def test_remove_never_empties_wave(self):
        shared, gen = make_wave(n=20, ws=0.1)  # wave of 2
        for _ in range(50):
            gen.next_remove()
        assert shared.wave.size == 1

    def test_prefill_emits_creakers_then_wave(self):
        shared, gen = make_wave(n=10, cs=0.3, ws=0.4, cp=0.5)
        emitted = [gen.next_prefill() for _ in range(shared.initial_size)]
        # creakers first (last 3 data indices), then the initial wave
        assert emitted == [7, 8, 9, 0, 1, 2, 3]

    def test_warmup_counts_and_targets_creakers(self):
        shared, gen = make_wave(n=100, cp=0.5, cs=0.2, ws=0.2, c_age=1000)
        index = DictIndex()
        seen = []
        index.get = lambda k: seen.append(k)  # type: ignore[method-assign]
        assert gen.warmup(index) == 1000
        creakers = {shared.creaker_key(j) for j in range(shared.creaker_len)}
        assert len(seen) == 1000
        assert set(seen) <= creakers

    def test_warmup_without_creakers_rejected(self):
        with pytest.raises(ValueError, match="warmup"):
            make_wave(n=100, cs=0.0, c_age=1000)

    def test_zero_age_warmup_noop(self):
        shared, gen = make_wave(n=100, cs=0.2, cp=0.5, ws=0.2, c_age=0)
        assert gen.warmup(DictIndex()) == 0

    def test_concurrent_cursor_accounting(self):
        n_threads, per_thread = 8, 12_500
        data = KeyGeneratorData(1_000_000, shuffle=False)
        shared = CreakersWaveShared(
            CreakersWaveParameters(0.0, 0.0, 0.3, 0), data
        )
        gens = [CreakersWaveKeyGenerator(shared, seeded_rng(11, t)) for t in range(n_threads)]
        removed = [[] for _ in range(n_threads)]

        def worker(t):
            g = gens[t]
            for _ in range(per_thread):
                g.next_insert()
                removed[t].append(g.next_remove())

        threads = [threading.Thread(target=worker, args=(t,)) for t in range(n_threads)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        total = n_threads * per_thread
        assert shared.wave.head.value == shared.wave_len + total
        assert shared.wave.tail.value == total
        claims = [k for sub in removed for k in sub]
        assert len(set(claims)) == total  # no duplicate remove claims


class TestLeafsHandshake:
    def make(self, n=100, cell=None, fixed_direction=None, insert_dist=None, tid=0, **params):
        rng, prng = rngs(tid)
        data = KeyGeneratorData(n, shuffle=False)
        return LeafsHandshakeKeyGenerator(
            LeafsHandshakeParameters(**params),
            data,
            rng,
            prng,
            shared_cell=cell,
            insert_dist=insert_dist,
            fixed_direction=fixed_direction,
        )

    def test_degenerate_offset_one_right(self):
        cell = LastRemovedCell(50)
        gen = self.make(cell=cell, fixed_direction=1, insert_dist=Degenerate(0))
        assert all(gen.next_insert() == 51 for _ in range(20))

    def test_wrap_at_boundary(self):
        cell = LastRemovedCell(99)
        gen = self.make(cell=cell, fixed_direction=1, insert_dist=Degenerate(0))
        assert gen.next_insert() == 0

    def test_remove_publishes(self):
        cell = LastRemovedCell(50)
        gen = self.make(cell=cell)
        removed = gen.next_remove()
        assert cell.value == removed

    def test_insert_base_is_previously_removed(self):
        cell = LastRemovedCell(50)
        gen = self.make(n=10_000, cell=cell, insert_dist=Degenerate(0))
        removed = set()
        for _ in range(500):
            removed.add(gen.next_remove())
            ins = gen.next_insert()
            assert (ins - 1) % 10_000 in removed or (ins + 1) % 10_000 in removed

    def test_shared_cell_across_generators(self):
        cell = LastRemovedCell(0)
        a = self.make(cell=cell, tid=0)
        b = self.make(cell=cell, fixed_direction=1, insert_dist=Degenerate(0), tid=1)
        k = a.next_remove()
        assert b.next_insert() == (k + 1) % 100

    def test_per_thread_cells_independent(self):
        cell = LastRemovedCell(0)
        a = self.make(cell=cell, per_thread=True, fixed_direction=1, insert_dist=Degenerate(0))
        cell.value = 77
        assert a.next_insert() == 51  # own cell initialized to range/2

    def test_folded_zipf_offsets(self):
        n = 100_000
        k = n // 2
        cell = LastRemovedCell(k)
        gen = self.make(n=n, cell=cell, insert_alpha=2.0, insert_window=100)
        samples = 1_000_000
        dist = Counter(abs(gen.next_insert() - k) for _ in range(samples))
        pmf = zipf_pmf(2.0, 100)
        linf = max(abs(dist[d] / samples - pmf[d - 1]) for d in range(1, 101))
        assert linf < 0.01
        # decreasing in distance
        freqs = [dist[d] / samples for d in range(1, 11)]
        assert all(freqs[i] >= freqs[i + 1] - 0.01 for i in range(9))


@settings(max_examples=15, deadline=None)
@given(
    n=st.integers(20, 5_000),
    seed=st.integers(0, 2**32),
    kind=st.sampled_from(["default", "skewed-sets", "temporary-skewed", "creakers-and-wave", "leafs-handshake"]),
)
def test_property_every_key_in_range(n, seed, kind):
    rng = seeded_rng(seed, 0)
    prng = seeded_rng(seed, 1)
    data = KeyGeneratorData(n, shuffle=True, seed=seed)
    if kind == "default":
        gen = DefaultKeyGenerator(data, UniformDistribution(n, rng), prng)
    elif kind == "skewed-sets":
        gen = SkewedSetsKeyGenerator(SkewedSetsParameters(0.8, 0.2, 0.8, 0.2, 0.5), data, rng, prng)
    elif kind == "temporary-skewed":
        params = TemporarySkewedParameters.with_defaults(
            state_count=2, hot_probs=[0.9, 0.5], hot_sizes=[0.2, 0.3], hot_time=7, relax_time=3
        )
        gen = TemporarySkewedKeyGenerator(params, data, rng, prng)
    elif kind == "creakers-and-wave":
        shared = CreakersWaveShared(CreakersWaveParameters(0.2, 0.2, 0.3, 0), data)
        gen = CreakersWaveKeyGenerator(shared, rng)
    else:
        gen = LeafsHandshakeKeyGenerator(LeafsHandshakeParameters(), data, rng, prng)
    for _ in range(150):
        assert 0 <= gen.next_get() < n
        assert 0 <= gen.next_insert() < n
        assert 0 <= gen.next_remove() < n
        assert 0 <= gen.next_prefill() < n

import math
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewbench.core import seeded_rng
from skewbench.distributions import UniformDistribution
from skewbench.keygen import DefaultKeyGenerator
from skewbench.keygen_data import KeyGeneratorData
from skewbench.threadloop import (
    DefaultThreadLoop,
    OperationMix,
    PrefillCounter,
    TemporaryOperationsParameters,
    TemporaryOperationsThreadLoop,
    ThreadLoop,
    WorkerFailure,
    run_measured_phase,
    run_prefill,
)

from conftest import DictIndex, RecordingIndex


def make_keygen(n=1000, tid=0, seed=7):
    rng = seeded_rng(seed, tid)
    prng = seeded_rng(seed, tid + 10_000)
    return DefaultKeyGenerator(KeyGeneratorData(n, shuffle=False), UniformDistribution(n, rng), prng)


def make_loop(index, mix=OperationMix(0.1, 0.1), tid=0, stop=None, n=1000, loop_cls=DefaultThreadLoop, head=None):
    stop = stop or threading.Event()
    head_arg = head if head is not None else mix
    return loop_cls(head_arg, make_keygen(n, tid), index, seeded_rng(99, tid), stop)


class TestOperationMix:
    def test_read_fraction(self):
        assert OperationMix(0.1, 0.1).read_fraction == pytest.approx(0.8)
        assert OperationMix(0.0, 0.0).read_fraction == 1.0

    @pytest.mark.parametrize(
        "ins,rem,msg",
        [
            (-0.1, 0.0, "insert fraction"),
            (0.0, 1.5, "remove fraction"),
            (0.6, 0.6, "sum to at most 1"),
        ],
    )
    def test_validation(self, ins, rem, msg):
        with pytest.raises(ValueError, match=msg):
            OperationMix(ins, rem)


class TestDefaultLoop:
    def test_all_reads(self):
        index = RecordingIndex()
        loop = make_loop(index, OperationMix(0.0, 0.0))
        for _ in range(200):
            loop.step()
        assert index.trace == ["G"] * 200
        assert loop.stats.gets_attempted == 200

    def test_all_inserts(self):
        index = RecordingIndex()
        loop = make_loop(index, OperationMix(1.0, 0.0))
        for _ in range(200):
            loop.step()
        assert index.trace == ["I"] * 200

    def test_mix_fractions_within_binomial_bounds(self):
        index = DictIndex()
        loop = make_loop(index, OperationMix(0.1, 0.1))
        n = 200_000
        for _ in range(n):
            loop.step()
        s = loop.stats
        assert s.total_ops == n
        sigma = math.sqrt(0.1 * 0.9 / n)
        assert abs(s.inserts_attempted / n - 0.1) < 5 * sigma
        assert abs(s.removes_attempted / n - 0.1) < 5 * sigma
        assert abs(s.gets_attempted / n - 0.8) < 5 * sigma

    def test_success_accounting_matches_index(self):
        index = DictIndex()
        loop = make_loop(index, OperationMix(0.3, 0.3), n=50)
        for _ in range(5_000):
            loop.step()
        s = loop.stats
        net = s.inserts_succeeded - s.removes_succeeded
        assert index.size() == net
        assert s.inserts_succeeded <= s.inserts_attempted
        assert s.removes_succeeded <= s.removes_attempted


class TestTemporaryOperations:
    def test_exact_trace(self):
        # two intervals of 4 and 2 operations: insert-only then remove-only
        params = TemporaryOperationsParameters(
            durations=(4, 2),
            mixes=(OperationMix(1.0, 0.0), OperationMix(0.0, 1.0)),
        )
        index = RecordingIndex()
        loop = make_loop(index, loop_cls=TemporaryOperationsThreadLoop, head=params)
        for _ in range(6):
            loop.step()
        assert index.trace == ["I", "I", "I", "I", "R", "R"]

    def test_schedule_is_cyclic(self):
        params = TemporaryOperationsParameters(
            durations=(2, 1),
            mixes=(OperationMix(1.0, 0.0), OperationMix(0.0, 1.0)),
        )
        index = RecordingIndex()
        loop = make_loop(index, loop_cls=TemporaryOperationsThreadLoop, head=params)
        for _ in range(9):
            loop.step()
        assert index.trace == ["I", "I", "R"] * 3

    def test_arity_mismatch(self):
        with pytest.raises(ValueError, match="expected 2 mixes"):
            TemporaryOperationsParameters(durations=(4, 2), mixes=(OperationMix(1.0, 0.0),))

    def test_zero_duration_rejected(self):
        with pytest.raises(ValueError, match="at least 1"):
            TemporaryOperationsParameters(durations=(0,), mixes=(OperationMix(0.0, 0.0),))


class TestPrefill:
    def test_counter_protocol(self):
        c = PrefillCounter(2)
        assert c.decrement_and_get() == 1
        assert c.decrement_and_get() == 0
        assert c.decrement_and_get() == -1
        assert c.increment_and_get() == 0
        assert c.value == 0

    @pytest.mark.parametrize("n_threads", [1, 4])
    def test_exact_size_small(self, n_threads):
        index = DictIndex()
        loops = [make_loop(index, tid=t, n=2_000) for t in range(n_threads)]
        run_prefill(index, loops, 1_000)
        assert index.size() == 1_000

    def test_exact_despite_duplicate_stream(self):
        # every thread draws from the same tiny key space, forcing collisions
        index = DictIndex()
        loops = [make_loop(index, tid=t, n=600) for t in range(8)]
        run_prefill(index, loops, 500)
        assert index.size() == 500

    def test_zero_initial_is_noop(self):
        index = DictIndex()
        run_prefill(index, [make_loop(index)], 0)
        assert index.size() == 0


class CountdownLoop(ThreadLoop):
    """Runs a fixed number of deterministic steps then requests stop."""

    def __init__(self, steps, mix, *args):
        super().__init__(*args)
        self._steps = steps
        self._mix = mix

    def _current_mix(self):
        return self._mix

    def run(self):
        import time

        start = time.perf_counter()
        for _ in range(self._steps):
            self.step()
        self.stats.elapsed_ms = (time.perf_counter() - start) * 1000.0
        self.stop_event.set()


class TestMeasuredPhase:
    def test_stops_near_duration(self):
        index = DictIndex()
        stop = threading.Event()
        loops = [make_loop(index, tid=t, stop=stop) for t in range(2)]
        result = run_measured_phase(loops, duration_ms=150)
        assert 100 <= result.wall_ms < 1_500
        assert result.total_ops > 0
        assert result.throughput_ops_per_sec > 0

    def test_thread_count_and_totals(self):
        index = DictIndex()
        stop = threading.Event()
        steps = 1_000
        loops = [
            CountdownLoop(
                steps,
                OperationMix(0.2, 0.2),
                make_keygen(1000, t),
                index,
                seeded_rng(5, t),
                stop,
            )
            for t in range(4)
        ]
        result = run_measured_phase(loops, duration_ms=60_000)
        assert len(result.per_thread) == 4
        # every loop performs at least its own quota; stragglers may be cut
        # short only by the stop flag, which CountdownLoop ignores
        assert result.total_ops == 4 * steps

    def test_worker_failure_propagates(self):
        class Exploding:
            def get(self, key):
                raise RuntimeError("boom")

            def put_if_absent(self, key, value):
                raise RuntimeError("boom")

            def remove(self, key):
                raise RuntimeError("boom")

        stop = threading.Event()
        loops = [make_loop(Exploding(), tid=t, stop=stop) for t in range(2)]
        with pytest.raises(WorkerFailure, match="worker"):
            run_measured_phase(loops, duration_ms=5_000)

    def test_empty_loops_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            run_measured_phase([], duration_ms=10)

    def test_deterministic_given_fixed_steps(self):
        def run_once():
            index = DictIndex()
            stop = threading.Event()
            loop = CountdownLoop(
                2_000, OperationMix(0.3, 0.3), make_keygen(100, 0), index, seeded_rng(5, 0), stop
            )
            run_measured_phase([loop], duration_ms=60_000)
            return sorted(index._d), loop.stats.inserts_succeeded

        assert run_once() == run_once()


@settings(max_examples=20, deadline=None)
@given(
    seed=st.integers(0, 2**32),
    ins=st.floats(0, 1),
    rem=st.floats(0, 1),
)
def test_property_stats_are_consistent(seed, ins, rem):
    if ins + rem > 1.0:
        ins, rem = ins / 2, rem / 2
    index = DictIndex()
    loop = DefaultThreadLoop(
        OperationMix(ins, rem), make_keygen(64, seed % 100), index, seeded_rng(seed, 0), threading.Event()
    )
    for _ in range(300):
        loop.step()
    s = loop.stats
    assert s.total_ops == 300
    assert s.inserts_succeeded - s.removes_succeeded == index.size()
    assert s.gets_hit <= s.gets_attempted

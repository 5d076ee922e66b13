"""Benchmark suite for concurrent key-value indices with skewed workloads.

The building blocks compose into infinite workloads:

- distributions: random index samplers over ``[0, range)``
- keygen_data:   a (possibly shuffled) permutation mapping indices to keys
- keygen:        per-operation key sources (get / insert / remove / prefill)
- threadloop:    operation selection, prefill protocol, statistics
- structures:    the concurrent binary search trees under test
- runner:        CLI orchestration, presets, CSV output
"""

from skewbench.core import (
    AggregateStats,
    BenchmarkParameters,
    ConcurrentIndex,
    ThreadStats,
    aggregate,
    seeded_rng,
)

__all__ = [
    "AggregateStats",
    "BenchmarkParameters",
    "ConcurrentIndex",
    "ThreadStats",
    "aggregate",
    "seeded_rng",
]

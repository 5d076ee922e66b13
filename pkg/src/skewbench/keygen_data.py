"""Index-to-key translation via a (possibly shuffled) permutation of the range."""

from __future__ import annotations

import random


class KeyGeneratorData:
    """A permutation of ``[0, range)`` shared by all worker threads.

    Shuffling uses Fisher-Yates driven by the benchmark seed (not per-thread
    seeds), so every thread sees the same key layout — hot-set semantics rely
    on a shared notion of which keys are hot. In non-shuffle mode the mapping
    is the identity and no array is materialized.
    """

    __slots__ = ("range_size", "shuffled", "_keys")

    def __init__(self, range_size: int, shuffle: bool = True, seed: int = 0) -> None:
        if range_size <= 0:
            raise ValueError("range must be positive")
        self.range_size = range_size
        self.shuffled = shuffle
        if shuffle:
            keys = list(range(range_size))
            random.Random(seed).shuffle(keys)
            self._keys = keys
        else:
            self._keys = None

    def get(self, index: int) -> int:
        if not 0 <= index < self.range_size:
            raise IndexError(f"index {index} out of range [0, {self.range_size})")
        if self._keys is None:
            return index
        return self._keys[index]

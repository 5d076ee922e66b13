"""Random index samplers over ``[0, range)``.

Uniform and Zipfian implement the mutable-range contract (``next(range)`` /
``set_range``); Skewed Uniform is the two-uniform composition over a hot
prefix and its cold complement.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass


class Distribution:
    """Samples an integer index in ``[0, range)`` for a range fixed at construction."""

    def next(self) -> int:
        raise NotImplementedError


class MutableDistribution(Distribution):
    """A distribution whose range may change mid-run."""

    def set_range(self, range_size: int) -> None:
        raise NotImplementedError

    def next(self, range_size: int | None = None) -> int:
        raise NotImplementedError


class UniformDistribution(MutableDistribution):
    def __init__(self, range_size: int, rng: random.Random) -> None:
        if range_size <= 0:
            raise ValueError("range must be positive")
        self._range = range_size
        self._rng = rng

    def set_range(self, range_size: int) -> None:
        if range_size <= 0:
            raise ValueError("range must be positive")
        self._range = range_size

    def next(self, range_size: int | None = None) -> int:
        r = self._range if range_size is None else range_size
        return self._rng.randrange(r)


@dataclass(frozen=True)
class SkewedUniformParameters:
    """Hot-set fraction and the probability mass directed at it."""

    hot_size: float
    hot_prob: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.hot_size <= 1.0:
            raise ValueError("hot size must be in [0, 1]")
        if not 0.0 <= self.hot_prob <= 1.0:
            raise ValueError("hot probability must be in [0, 1]")


class SkewedUniformDistribution(Distribution):
    """With probability ``hot_prob`` a uniform index in the hot prefix
    ``[0, hot_length)``, otherwise ``hot_length`` plus a uniform index over
    the cold remainder."""

    def __init__(self, params: SkewedUniformParameters, range_size: int, rng: random.Random) -> None:
        if range_size <= 0:
            raise ValueError("range must be positive")
        hot_length = int(params.hot_size * range_size)
        if hot_length == 0 and params.hot_prob > 0.0:
            raise ValueError("empty hot set cannot be sampled (hot_size too small for range)")
        if hot_length == range_size and params.hot_prob < 1.0:
            raise ValueError("empty cold set cannot be sampled (hot_size covers whole range)")
        self.hot_length = hot_length
        self._hot_prob = params.hot_prob
        self._rng = rng
        self._cold_length = range_size - hot_length

    def next(self) -> int:
        if self._rng.random() < self._hot_prob:
            return self._rng.randrange(self.hot_length)
        return self.hot_length + self._rng.randrange(self._cold_length)


@dataclass(frozen=True)
class ZipfianParameters:
    alpha: float

    def __post_init__(self) -> None:
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")


def _helper1(x: float) -> float:
    # log1p(x)/x, stable near 0
    if abs(x) > 1e-8:
        return math.log1p(x) / x
    return 1.0 - x / 2.0 + x * x / 3.0


def _helper2(x: float) -> float:
    # expm1(x)/x, stable near 0
    if abs(x) > 1e-8:
        return math.expm1(x) / x
    return 1.0 + x / 2.0 + x * x / 6.0


class ZipfianDistribution(MutableDistribution):
    """Zipf sampler: index ``k - 1`` where rank ``k`` in ``{1..range}`` is
    drawn with probability proportional to ``1 / k**alpha``.

    Uses rejection inversion over the integral of the density, so each sample
    is O(1) and a range change only recomputes two constants — cheap enough
    to sit inside the hot loop of a mutable-range consumer.
    """

    def __init__(self, alpha: float, range_size: int, rng: random.Random) -> None:
        if alpha <= 0.0:
            raise ValueError("alpha must be positive")
        self._alpha = alpha
        self._rng = rng
        self._n = 0
        self.set_range(range_size)

    def _h_integral(self, x: float) -> float:
        log_x = math.log(x)
        return _helper2((1.0 - self._alpha) * log_x) * log_x

    def _h(self, x: float) -> float:
        return math.exp(-self._alpha * math.log(x))

    def _h_integral_inverse(self, x: float) -> float:
        t = x * (1.0 - self._alpha)
        if t < -1.0:
            t = -1.0
        return math.exp(_helper1(t) * x)

    def set_range(self, range_size: int) -> None:
        if range_size <= 0:
            raise ValueError("range must be positive")
        if range_size == self._n:
            return
        self._n = range_size
        self._h_x1 = self._h_integral(1.5) - 1.0
        self._h_n = self._h_integral(range_size + 0.5)
        self._s = 2.0 - self._h_integral_inverse(self._h_integral(2.5) - self._h(2.0))

    def next(self, range_size: int | None = None) -> int:
        if range_size is not None and range_size != self._n:
            self.set_range(range_size)
        n = self._n
        if n == 1:
            return 0
        rng_random = self._rng.random
        while True:
            u = self._h_n + rng_random() * (self._h_x1 - self._h_n)
            x = self._h_integral_inverse(u)
            k = int(x + 0.5)
            if k < 1:
                k = 1
            elif k > n:
                k = n
            if k - x <= self._s or u >= self._h_integral(k + 0.5) - self._h(k):
                return k - 1


def zipf_pmf(alpha: float, range_size: int) -> list[float]:
    """Exact Zipf probabilities by direct harmonic summation (test oracle)."""
    weights = [1.0 / (k ** alpha) for k in range(1, range_size + 1)]
    h = sum(weights)
    return [w / h for w in weights]


DISTRIBUTION_IDS = ("uniform", "skewed-uniform", "zipfian")


def build_distribution(
    name: str,
    range_size: int,
    rng: random.Random,
    hot_size: float = 0.0,
    hot_prob: float = 0.0,
    alpha: float = 1.0,
) -> Distribution:
    """Registry lookup by string identifier, for CLI wiring."""
    if name == "uniform":
        return UniformDistribution(range_size, rng)
    if name == "skewed-uniform":
        return SkewedUniformDistribution(SkewedUniformParameters(hot_size, hot_prob), range_size, rng)
    if name == "zipfian":
        ZipfianParameters(alpha)
        return ZipfianDistribution(alpha, range_size, rng)
    raise ValueError(f"unknown distribution: {name!r} (expected one of {DISTRIBUTION_IDS})")

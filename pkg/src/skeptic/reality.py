"""Reality's move generators.

A spec is immutable configuration; ``spec.build(rng, dim)`` returns a
player whose ``move(bet, n)`` answers Skeptic's announced bet in round
``n``. Stochastic players draw from ``rng`` only, so a seed fixes the stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from .game import move_norm, update_average

BLOCK = 4096


def _check_scalar(dim: int | None, spec) -> None:
    if dim is not None:
        raise ValueError(f"{type(spec).__name__} is scalar; wrap it in VectorUnitBall for dim={dim}")


class _Drawn:
    """Serves moves from blocks of pre-drawn samples."""

    def __init__(self, rng: np.random.Generator, draw):
        self.rng = rng
        self.draw = draw
        self.buf = []
        self.i = 0

    def move(self, bet, n):
        if self.i == len(self.buf):
            self.buf = self.draw(self.rng, BLOCK).tolist()
            self.i = 0
        x = self.buf[self.i]
        self.i += 1
        return x


class _Stochastic:
    """Mixin for i.i.d. variants; ``sample`` backs Monte Carlo runs."""

    mean_zero = False

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    def build(self, rng: np.random.Generator, dim: int | None = None):
        _check_scalar(dim, self)
        return _Drawn(rng, self.sample)


@dataclass(frozen=True)
class FairCoin(_Stochastic):
    kind = "fair_coin"
    mean_zero = True

    def sample(self, rng, size):
        return 2.0 * rng.integers(0, 2, size=size) - 1.0


@dataclass(frozen=True)
class BiasedCoin(_Stochastic):
    p: float = 0.5
    kind = "biased_coin"

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    def sample(self, rng, size):
        return np.where(rng.random(size) < self.p, 1.0, -1.0)


@dataclass(frozen=True)
class UniformNoise(_Stochastic):
    kind = "uniform_noise"
    mean_zero = True

    def sample(self, rng, size):
        # uniform on [-1, 1)
        return rng.uniform(-1.0, 1.0, size)


class _Constant:
    def __init__(self, b: float):
        self.b = b

    def move(self, bet, n):
        return self.b


@dataclass(frozen=True)
class ConstantBias:
    b: float = 0.0
    kind = "constant_bias"

    def __post_init__(self):
        if not -1.0 <= self.b <= 1.0:
            raise ValueError(f"b must lie in [-1, 1], got {self.b}")

    def build(self, rng=None, dim=None):
        _check_scalar(dim, self)
        return _Constant(float(self.b))


def rate_target(a: float, n: int, n_start: int = 3) -> float:
    """Target running average ``a sqrt(ln n / n)``, zero before ``n_start``."""
    if n < n_start:
        return 0.0
    return a * math.sqrt(math.log(n) / n)


def rate_path_move(a: float, n: int, prev_avg: float, n_start: int = 3) -> float:
    """Move that puts the running average on ``rate_target(a, n)``, clamped to [-1, 1]."""
    x = n * rate_target(a, n, n_start) - (n - 1) * prev_avg
    return min(1.0, max(-1.0, x))


class _RatePath:
    def __init__(self, a: float, n_start: int):
        self.a = a
        self.n_start = n_start
        self.avg = 0.0

    def move(self, bet, n):
        x = rate_path_move(self.a, n, self.avg, self.n_start)
        self.avg = update_average(self.avg, n, x)
        return x


@dataclass(frozen=True)
class RatePath:
    """Deterministic path whose statistic ``sqrt(n)|xbar_n|/sqrt(ln n)`` tends to ``a``."""

    a: float = 1.0
    n_start: int = 3
    kind = "rate_path"

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if self.n_start < 2:
            raise ValueError("n_start must be >= 2 so that ln n > 0")

    def build(self, rng=None, dim=None):
        _check_scalar(dim, self)
        return _RatePath(float(self.a), self.n_start)


def unit(v: np.ndarray) -> np.ndarray:
    """``v / ||v||`` shrunk by ulps until its computed norm is at most 1."""
    u = v / move_norm(v)
    while move_norm(u) > 1.0:
        u = u * (1.0 - 2.0**-52)
    return u


class _Adversary:
    def __init__(self, magnitude: float):
        self.magnitude = magnitude

    def move(self, bet, n):
        if bet > 0:
            return -self.magnitude
        if bet < 0:
            return self.magnitude
        return 0.0


class _VectorAdversary(_Adversary):
    def move(self, bet, n):
        if not np.any(bet):
            return np.zeros_like(bet)
        return -self.magnitude * unit(bet)


@dataclass(frozen=True)
class AdversarialMinimizer:
    """Moves against the announced bet: ``-magnitude sign(M)``, 0 when ``M = 0``."""

    magnitude: float = 1.0
    kind = "adversarial"

    def __post_init__(self):
        if not 0.0 < self.magnitude <= 1.0:
            raise ValueError(f"magnitude must lie in (0, 1], got {self.magnitude}")

    def build(self, rng=None, dim=None):
        if dim is None:
            return _Adversary(float(self.magnitude))
        return _VectorAdversary(float(self.magnitude))


ScalarReality = Union[FairCoin, BiasedCoin, UniformNoise, ConstantBias, RatePath,
                      AdversarialMinimizer]
Direction = Literal["fixed", "rotating", "random"]


class _Embedded:
    def __init__(self, inner, dim, direction, axis, period, rng):
        self.inner = inner
        self.dim = dim
        self.direction = direction
        self.period = period
        self.rng = rng
        e = np.zeros(dim)
        e[axis] = 1.0
        self.fixed = e

    def _direction(self, n):
        if self.direction == "fixed":
            return self.fixed
        if self.direction == "rotating":
            theta = 2.0 * math.pi * (n - 1) / self.period
            v = np.zeros(self.dim)
            v[0], v[1] = math.cos(theta), math.sin(theta)
            return unit(v)
        return unit(self.rng.standard_normal(self.dim))

    def move(self, bet, n):
        u = self._direction(n)
        s = self.inner.move(float(bet @ u), n)
        return s * u


@dataclass(frozen=True)
class VectorUnitBall:
    """A scalar variant played along a unit direction in R^m.

    ``direction``: ``fixed`` (basis vector ``axis``), ``rotating`` (circle in
    the first two coordinates, one turn per ``period`` rounds) or ``random``
    (fresh uniform direction each round). The inner variant sees the bet
    projected on the current direction. An adversarial inner variant plays
    ``-magnitude M/||M||`` directly.
    """

    inner: ScalarReality = FairCoin()
    direction: Direction = "fixed"
    axis: int = 0
    period: int = 16
    kind = "vector_unit_ball"

    def __post_init__(self):
        if isinstance(self.inner, VectorUnitBall):
            raise ValueError("inner variant must be scalar")
        if self.direction not in ("fixed", "rotating", "random"):
            raise ValueError(f"unknown direction mode {self.direction!r}")
        if self.period < 1:
            raise ValueError("period must be >= 1")

    @property
    def mean_zero(self) -> bool:
        return getattr(self.inner, "mean_zero", False)

    def build(self, rng: np.random.Generator, dim: int | None = None):
        if dim is None:
            raise ValueError("VectorUnitBall needs a vector game")
        if not 0 <= self.axis < dim:
            raise ValueError(f"axis {self.axis} out of range for dim={dim}")
        if self.direction == "rotating" and dim < 2:
            raise ValueError("rotating direction needs dim >= 2")
        if isinstance(self.inner, AdversarialMinimizer):
            return self.inner.build(rng, dim)
        return _Embedded(self.inner.build(rng), dim, self.direction, self.axis, self.period, rng)


RealitySpec = Union[ScalarReality, VectorUnitBall]

"""Skeptic's strategies.

Every built-in strategy is capital-proportional: it announces a *fraction*
``f_n`` and bets ``M_n = f_n K_{n-1}``. The bet helpers (``*_bet``) take the
capital explicitly and return absolute bets; the player objects built from
the specs return fractions so the game can keep working in log space.

Specs are immutable and validated on construction; ``spec.build()`` returns
a fresh player holding per-run mutable state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Union

import numpy as np

SYMMETRY_TOL = 1e-12
# eigenvalues within this relative distance of 1/2 are accepted as 1/2
SPECTRUM_TOL = 1e-12


# -- bet rules -----------------------------------------------------------------

def fixed_epsilon_bet(epsilon: float, capital: float) -> float:
    return epsilon * capital


def past_average_bet(c: float, avg: float, capital: float) -> float:
    """Bet ``c * avg * capital``; with ``c <= 1/2`` and ``|avg| <= 1`` a
    round can cost at most half the capital."""
    return c * avg * capital


def one_sided_bet(sign: int, c: float, avg: float, capital: float) -> float:
    """Past-average bet clipped to one side.

    ``sign=+1`` only buys (bet ``c max(avg, 0) K``), ``sign=-1`` only sells
    (bet ``-c max(-avg, 0) K``).
    """
    if sign > 0:
        return c * max(avg, 0.0) * capital
    if sign < 0:
        return -c * max(-avg, 0.0) * capital
    raise ValueError("sign must be +1 or -1")


def linear_bet(op: "LinearOperatorSpec", avg: np.ndarray, capital: float) -> np.ndarray:
    return capital * (op.A @ avg)


# -- spectra -------------------------------------------------------------------

def check_symmetric(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    asym = float(np.max(np.abs(A - A.T))) if A.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValueError(f"matrix is not symmetric (max |A - A^T| = {asym:.3g})")
    return A


def spectral_bounds(A) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a symmetric matrix."""
    A = check_symmetric(A)
    eig = np.linalg.eigvalsh(A)
    return float(eig[0]), float(eig[-1])


def sqrt_psd(A) -> np.ndarray:
    """Symmetric square root of a positive semidefinite matrix."""
    A = check_symmetric(A)
    w, V = np.linalg.eigh(A)
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


# -- mixture distributions -----------------------------------------------------

def uniform_moment(m: int) -> float:
    """``m``-th moment of the uniform distribution on [-1/2, 1/2]."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m % 2:
        return 0.0
    return 1.0 / ((m + 1) * 2.0**m)


@dataclass(frozen=True)
class UniformHalf:
    """Uniform mixing distribution on [-1/2, 1/2].

    The account form integrates over it with ``nodes``-point Gauss-Legendre
    quadrature, exact for polynomials of degree ``< 2 * nodes``.
    """

    nodes: int = 64

    def __post_init__(self):
        if self.nodes < 1:
            raise ValueError("quadrature node count must be >= 1")

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        t, w = np.polynomial.legendre.leggauss(self.nodes)
        return 0.5 * t, 0.5 * w

    def moment(self, m: int) -> float:
        return uniform_moment(m)


@dataclass(frozen=True)
class DyadicDiscrete:
    """Atoms ``+-2^-k`` with mass ``2^-(k+1)`` each, ``k = 1..truncation``.

    The tail mass ``2^-truncation`` is split evenly between ``+-2^-truncation``.
    """

    truncation: int = 20

    def __post_init__(self):
        if self.truncation < 1:
            raise ValueError("truncation must be >= 1")

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        k = np.arange(1, self.truncation + 1)
        eps = 2.0 ** -k.astype(float)
        p = 2.0 ** -(k + 1.0)
        p[-1] += 2.0 ** -(self.truncation + 1.0)
        return np.concatenate([-eps[::-1], eps]), np.concatenate([p[::-1], p])

    def moment(self, m: int) -> float:
        if m < 1:
            raise ValueError("m must be >= 1")
        eps, p = self.atoms()
        return float(np.sum(p * eps**m))


Mixing = Union[UniformHalf, DyadicDiscrete]


@dataclass(frozen=True)
class MomentTable:
    """Moments ``mu_1 .. mu_n`` of a mixing distribution (``mu[m-1] = mu_m``)."""

    mu: np.ndarray

    @classmethod
    def of(cls, mixing: Mixing, n: int) -> "MomentTable":
        return cls(np.array([mixing.moment(m) for m in range(1, n + 1)]))

    def __len__(self) -> int:
        return len(self.mu)


@dataclass
class SymmetricFunctionState:
    """Elementary symmetric functions ``e[k] = e_{n,k}`` of the moves so far."""

    e: np.ndarray = field(default_factory=lambda: np.ones(1))

    @property
    def n(self) -> int:
        return len(self.e) - 1


def update_symmetric(sym: SymmetricFunctionState, x: float) -> SymmetricFunctionState:
    """Append a move: ``e_{n,k} = e_{n-1,k} + x e_{n-1,k-1}``."""
    e = np.append(sym.e, 0.0)
    e[1:] += x * sym.e
    return SymmetricFunctionState(e)


def mixture_bet_symmetric(moments: MomentTable, sym: SymmetricFunctionState) -> float:
    """Mixture bet ``sum_i mu_{i+1} e_{n-1,i}`` from the moment form.

    Intended as a small-``n`` oracle: ``e_{n,i}`` grows like a binomial
    coefficient, and a non-finite result raises ``OverflowError``.
    """
    n = sym.n + 1
    if len(moments) < n:
        raise ValueError(f"need {n} moments, table has {len(moments)}")
    with np.errstate(over="ignore", invalid="ignore"):
        bet = float(np.dot(moments.mu[:n], sym.e))
    if not math.isfinite(bet):
        raise OverflowError(f"symmetric-function bet overflowed at n={n}")
    return bet


@dataclass
class MixtureAccounts:
    """One account per mixture atom, stored as log capital.

    ``log_account[k] = sum_i log(1 + eps_k x_i)``; the mixture capital is
    ``sum_k w_k exp(log_account[k])``.
    """

    eps: np.ndarray
    weights: np.ndarray
    log_account: np.ndarray

    @classmethod
    def of(cls, mixing: Mixing) -> "MixtureAccounts":
        eps, w = mixing.atoms()
        return cls(eps, w, np.zeros_like(eps))

    def update(self, x: float) -> None:
        self.log_account += np.log1p(self.eps * x)

    def _shifted(self) -> tuple[float, np.ndarray]:
        top = float(np.max(self.log_account))
        return top, self.weights * np.exp(self.log_account - top)

    def log_capital(self) -> float:
        top, scaled = self._shifted()
        return top + math.log(float(np.sum(scaled)))

    def fraction(self) -> float:
        _, scaled = self._shifted()
        return float(np.dot(scaled, self.eps) / np.sum(scaled))

    def scale(self) -> float:
        """``sum_k w_k |eps_k| account_k``, the magnitude the bet cancels down from."""
        top, scaled = self._shifted()
        return float(np.dot(scaled, np.abs(self.eps))) * math.exp(min(top, 709.0))


def mixture_bet_accounts(accounts: MixtureAccounts) -> float:
    """Mixture bet ``sum_k w_k eps_k exp(log_account_k)`` via a max-shifted sum."""
    top, scaled = accounts._shifted()
    shifted_bet = float(np.dot(scaled, accounts.eps))
    if top > 709.0:
        return math.copysign(math.inf, shifted_bet) if shifted_bet else 0.0
    return shifted_bet * math.exp(top)


# -- specs and players ---------------------------------------------------------

@dataclass(frozen=True)
class FixedEpsilon:
    epsilon: float
    kind = "fixed_epsilon"
    dim = None

    def __post_init__(self):
        if not abs(self.epsilon) <= 0.5:
            raise ValueError(f"epsilon must satisfy |epsilon| <= 1/2, got {self.epsilon}")

    def build(self) -> "_ConstantFraction":
        return _ConstantFraction(fixed_epsilon_bet(self.epsilon, 1.0))


def _check_c(c: float) -> None:
    if not 0.0 < c <= 0.5:
        raise ValueError(f"c must satisfy 0 < c <= 1/2, got {c}")


@dataclass(frozen=True)
class PastAverage:
    c: float
    kind = "past_average"
    dim = None

    def __post_init__(self):
        _check_c(self.c)

    def build(self) -> "_PastAverage":
        return _PastAverage(self.c)


@dataclass(frozen=True)
class OneSidedPositive:
    c: float
    kind = "one_sided_positive"
    dim = None
    sign = 1

    def __post_init__(self):
        _check_c(self.c)

    def build(self) -> "_OneSided":
        return _OneSided(self.c, self.sign)


@dataclass(frozen=True)
class OneSidedNegative(OneSidedPositive):
    kind = "one_sided_negative"
    sign = -1


Form = Literal["accounts", "symmetric"]


@dataclass(frozen=True)
class Mixture:
    """Mixture of epsilon-strategies.

    ``form="accounts"`` keeps one log-account per atom (production path).
    ``form="symmetric"`` keeps the elementary symmetric functions of the
    whole history and is limited to ``max_n`` rounds unless raised.
    """

    mixing: Mixing = field(default_factory=UniformHalf)
    form: Form = "accounts"
    max_n: int = 64
    kind = "mixture"
    dim = None

    def __post_init__(self):
        if self.form not in ("accounts", "symmetric"):
            raise ValueError(f"unknown mixture form {self.form!r}")
        if self.max_n < 1:
            raise ValueError("max_n must be >= 1")

    def build(self):
        if self.form == "accounts":
            return _MixtureAccountsPlayer(MixtureAccounts.of(self.mixing))
        return _MixtureSymmetricPlayer(self.mixing, self.max_n)


@dataclass(frozen=True, eq=False)
class LinearOperatorSpec:
    """Symmetric betting operator with spectrum inside (0, 1/2]."""

    A: np.ndarray
    kind = "linear"

    def __post_init__(self):
        A = check_symmetric(self.A).copy()
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        c0, c1 = self.bounds
        if not c0 > 0.0:
            raise ValueError(f"smallest eigenvalue must be > 0, got {c0}")
        if not c1 <= 0.5 * (1.0 + SPECTRUM_TOL):
            raise ValueError(f"largest eigenvalue must be <= 1/2, got {c1}")

    @cached_property
    def bounds(self) -> tuple[float, float]:
        return spectral_bounds(self.A)

    @property
    def c0(self) -> float:
        return self.bounds[0]

    @property
    def c1(self) -> float:
        return self.bounds[1]

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @cached_property
    def sqrt(self) -> np.ndarray:
        return sqrt_psd(self.A)

    def build(self) -> "_Linear":
        return _Linear(self)

    def __eq__(self, other):
        return isinstance(other, LinearOperatorSpec) and np.array_equal(self.A, other.A)

    def __hash__(self):
        return hash(self.A.tobytes())

    def __repr__(self):
        return f"LinearOperatorSpec(dim={self.dim}, c0={self.c0:.6g}, c1={self.c1:.6g})"


StrategySpec = Union[FixedEpsilon, PastAverage, OneSidedPositive, OneSidedNegative,
                     Mixture, LinearOperatorSpec]


class _ConstantFraction:
    def __init__(self, f: float):
        self.f = f

    def fraction(self, n, avg, capital):
        return self.f

    def observe(self, x):
        pass

    def state_size(self) -> int:
        return 1


class _PastAverage:
    # Uses only the game's xbar_{n-1} and K_{n-1}; nothing of its own.
    def __init__(self, c: float):
        self.c = c

    def fraction(self, n, avg, capital):
        return self.c * avg

    def observe(self, x):
        pass

    def state_size(self) -> int:
        return 2


class _OneSided(_PastAverage):
    def __init__(self, c: float, sign: int):
        super().__init__(c)
        self.sign = sign

    def fraction(self, n, avg, capital):
        return one_sided_bet(self.sign, self.c, avg, 1.0)


class _Linear:
    def __init__(self, op: LinearOperatorSpec):
        self.op = op

    def fraction(self, n, avg, capital):
        return linear_bet(self.op, avg, 1.0)

    def observe(self, x):
        pass

    def state_size(self) -> int:
        return 2


class _MixtureAccountsPlayer:
    def __init__(self, accounts: MixtureAccounts):
        self.accounts = accounts

    def fraction(self, n, avg, capital):
        return self.accounts.fraction()

    def observe(self, x):
        self.accounts.update(x)

    def state_size(self) -> int:
        return len(self.accounts.log_account)


class _MixtureSymmetricPlayer:
    def __init__(self, mixing: Mixing, max_n: int):
        self.moments = MomentTable.of(mixing, max_n)
        self.sym = SymmetricFunctionState()
        self.max_n = max_n

    def fraction(self, n, avg, capital):
        if n > self.max_n:
            raise OverflowError(
                f"symmetric-function form limited to {self.max_n} rounds; raise max_n to override"
            )
        return mixture_bet_symmetric(self.moments, self.sym) / capital

    def observe(self, x):
        self.sym = update_symmetric(self.sym, x)

    def state_size(self) -> int:
        return len(self.sym.e)

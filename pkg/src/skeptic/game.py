"""Protocol loop for the bounded forecasting game and its linear (vector) variant.

Each round Skeptic announces a bet ``M_n``, Reality answers with a move
``x_n`` (``|x_n| <= 1`` or ``||x_n|| <= 1``) after seeing the bet, and the
capital becomes ``K_n = K_{n-1} + M_n . x_n`` with ``K_0 = 1``.

``log_capital`` is carried alongside ``capital`` through ``log1p`` of the
relative increment, so it stays valid after ``capital`` overflows to ``inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class GameError(ValueError):
    """Raised when a round violates the protocol."""

    def __init__(self, message: str, round_index: int | None = None):
        if round_index is not None:
            message = f"round {round_index}: {message}"
        super().__init__(message)
        self.round_index = round_index


@dataclass(frozen=True)
class GameState:
    n: int = 0
    capital: float = 1.0
    log_capital: float = 0.0
    avg: Any = 0.0
    sum: Any = 0.0

    @classmethod
    def initial(cls, dim: int | None = None) -> "GameState":
        if dim is None:
            return cls()
        return cls(avg=np.zeros(dim), sum=np.zeros(dim))

    @property
    def is_vector(self) -> bool:
        return isinstance(self.avg, np.ndarray)


def move_norm(x) -> float:
    """Euclidean norm from an exact sum of squares, so it does not depend on
    array layout or BLAS and every check in the package agrees on it."""
    return math.sqrt(math.fsum(v * v for v in np.asarray(x, dtype=float).ravel().tolist()))


def validate_move(x, round_index: int | None = None):
    """Return ``x`` as a float (scalar) or float array (vector) if admissible.

    The bound is compared exactly against 1; nothing is clamped.
    """
    if np.ndim(x) == 0:
        x = float(x)
        if not abs(x) <= 1.0:
            raise GameError(f"move {x!r} outside [-1, 1]", round_index)
        return x
    x = np.asarray(x, dtype=float)
    norm = move_norm(x)
    if not norm <= 1.0:
        raise GameError(f"move norm {norm!r} exceeds 1", round_index)
    return x


def update_average(avg, n: int, x):
    """Running mean after the ``n``-th observation ``x``: ``((n-1) avg + x) / n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return ((n - 1) * avg + x) / n


def _capital_update(capital: float, log_capital: float, bet_dot_x: float,
                    increment: float, round_index: int) -> tuple[float, float]:
    # increment is the relative change M.x / K_{n-1}
    if not 1.0 + increment > 0.0:
        raise GameError(
            f"capital would become non-positive (relative increment {increment!r})",
            round_index,
        )
    new_log = log_capital + math.log1p(increment)
    if math.isfinite(capital):
        new_capital = capital + bet_dot_x
        if not math.isfinite(new_capital):
            new_capital = math.inf
    else:
        new_capital = math.inf if new_log > 709.0 else math.exp(new_log)
    return new_capital, new_log


def step(state: GameState, bet, x) -> GameState:
    """Play one round with absolute bet ``bet`` and Reality move ``x``."""
    n = state.n + 1
    if not state.capital > 0:
        raise GameError("capital must be positive before betting", n)
    x = validate_move(x, n)
    if state.is_vector != isinstance(x, np.ndarray):
        raise GameError("move shape does not match game dimension", n)
    bet_dot_x = float(np.dot(bet, x)) if state.is_vector else float(bet) * x
    if not math.isfinite(bet_dot_x):
        raise GameError("bet must be finite", n)
    capital, log_capital = _capital_update(
        state.capital, state.log_capital, bet_dot_x, bet_dot_x / state.capital, n
    )
    total = state.sum + x
    return GameState(n=n, capital=capital, log_capital=log_capital,
                     avg=update_average(state.avg, n, x), sum=total)


@dataclass
class Trajectory:
    """Recorded rows of one game.

    Row ``j`` describes round ``n[j]``: Reality's move ``x``, the running
    average ``xbar`` after the move, the absolute bet, the capital before
    and after (``capital``/``log_capital`` are post-round), and ``fraction``,
    the bet relative to the pre-round capital.
    """

    n: np.ndarray
    x: np.ndarray
    xbar: np.ndarray
    bet: np.ndarray
    capital: np.ndarray
    log_capital: np.ndarray
    fraction: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.n)

    @property
    def is_vector(self) -> bool:
        return self.x.ndim == 2

    @property
    def dim(self) -> int | None:
        return self.x.shape[1] if self.is_vector else None

    def xbar_norm(self) -> np.ndarray:
        return np.linalg.norm(self.xbar, axis=1) if self.is_vector else np.abs(self.xbar)

    def final_log_capital(self) -> float:
        return float(self.log_capital[-1])

    def equals(self, other: "Trajectory") -> bool:
        names = ("n", "x", "xbar", "bet", "capital", "log_capital", "fraction")
        return all(np.array_equal(getattr(self, a), getattr(other, a)) for a in names)


def run_game(strategy, reality, horizon: int, seed: int = 0,
             record_every: int = 1) -> Trajectory:
    """Play ``horizon`` rounds of ``strategy`` against ``reality``.

    ``strategy`` and ``reality`` are spec objects (see ``skeptic.strategies``
    and ``skeptic.reality``); fresh per-run players are built from them, so
    the result depends only on the specs and ``seed``. Rows are kept every
    ``record_every`` rounds plus the final round.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")

    dim = strategy.dim
    skeptic = strategy.build()
    nature = reality.build(np.random.default_rng(seed), dim)

    rows = horizon // record_every + (horizon % record_every != 0)
    shape = (rows,) if dim is None else (rows, dim)
    rec_n = np.zeros(rows, dtype=np.int64)
    rec_x, rec_xbar, rec_bet, rec_f = (np.zeros(shape) for _ in range(4))
    rec_k, rec_logk = np.zeros(rows), np.zeros(rows)

    capital, log_capital = 1.0, 0.0
    avg = 0.0 if dim is None else np.zeros(dim)
    fraction_of = skeptic.fraction
    observe = skeptic.observe
    move_of = nature.move
    j = 0
    for n in range(1, horizon + 1):
        f = fraction_of(n, avg, capital)
        bet = f * capital
        x = move_of(bet, n)
        if dim is None:
            if not -1.0 <= x <= 1.0:
                raise GameError(f"move {x!r} outside [-1, 1]", n)
            increment = f * x
            bet_dot_x = bet * x
        else:
            x = validate_move(x, n)
            increment = float(f @ x)
            bet_dot_x = float(bet @ x)
        capital, log_capital = _capital_update(capital, log_capital, bet_dot_x, increment, n)
        observe(x)
        avg = update_average(avg, n, x)
        if n % record_every == 0 or n == horizon:
            rec_n[j] = n
            rec_x[j] = x
            rec_xbar[j] = avg
            rec_bet[j] = bet
            rec_f[j] = f
            rec_k[j] = capital
            rec_logk[j] = log_capital
            j += 1

    meta = {
        "strategy": strategy,
        "reality": reality,
        "seed": seed,
        "horizon": horizon,
        "record_every": record_every,
    }
    return Trajectory(rec_n, rec_x, rec_xbar, rec_bet, rec_k, rec_logk, rec_f, meta)

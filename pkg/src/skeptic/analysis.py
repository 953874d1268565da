"""Finite-horizon checks of the identities and capital bounds behind the
past-average strategy, plus the Azuma-Hoeffding tail comparison.

Limsup statements cannot be checked at finite ``n``; each check here asserts
an inequality that holds at every round. Natural logarithms throughout.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Literal, Sequence

import numpy as np

from .game import Trajectory, move_norm
from .strategies import LinearOperatorSpec, OneSidedNegative, OneSidedPositive, PastAverage

IDENTITY_TOL = 1e-9
BOUND_TOL = 1e-9
OVERSHOOT_TOL = 1e-12
SPECTRAL_TOL = 1e-12


@dataclass
class VerificationReport:
    """Outcome of one check.

    ``max_discrepancy`` is the worst raw value of ``required - actual`` (or
    ``|lhs - rhs|`` for identities) and may be negative for slack inequalities.
    ``max_violation`` is the worst excess over the per-round tolerance, so
    ``passed == (max_violation <= 0)``.
    """

    name: str
    passed: bool
    max_violation: float
    max_discrepancy: float
    first_violation: int | None
    rounds_checked: int
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _report(name: str, ns, discrepancy, tolerance, **details) -> VerificationReport:
    ns = np.asarray(ns)
    discrepancy = np.atleast_1d(np.asarray(discrepancy, dtype=float))
    if discrepancy.size == 0:
        return VerificationReport(name, True, 0.0, -math.inf, None, 0, details)
    excess = discrepancy - np.broadcast_to(tolerance, discrepancy.shape)
    # NaN counts as a violation
    bad = ~(excess <= 0)
    first = int(np.atleast_1d(ns)[np.argmax(bad)]) if bad.any() else None
    max_violation = math.inf if np.isnan(excess).any() else max(0.0, float(np.max(excess)))
    return VerificationReport(
        name=name,
        passed=first is None,
        max_violation=max_violation,
        max_discrepancy=float(np.nanmax(discrepancy)) if not np.isnan(discrepancy).all() else math.nan,
        first_violation=first,
        rounds_checked=int(discrepancy.size),
        details=details,
    )


# -- the summation identity ----------------------------------------------------

def sum_identity_sides(path) -> tuple[float, float]:
    """Both sides of

        sum_{i=1}^n xbar_{i-1} x_i
          = 1/2 sum_{i=2}^n i/(i-1) xbar_i^2 + n/2 xbar_n^2
            - 1/2 (x_1^2 + sum_{i=2}^n x_i^2/(i-1))

    with ``xbar_0 = 0``, evaluated separately.
    """
    x = np.asarray(path, dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError("identity needs n >= 2")
    i = np.arange(1, n + 1, dtype=float)
    xbar = np.cumsum(x) / i
    prev = np.concatenate([[0.0], xbar[:-1]])
    lhs = math.fsum(prev * x)
    tail = i[1:]
    rhs = (0.5 * math.fsum(tail / (tail - 1.0) * xbar[1:] ** 2)
           + 0.5 * n * xbar[-1] ** 2
           - 0.5 * (x[0] ** 2 + math.fsum(x[1:] ** 2 / (tail - 1.0))))
    return lhs, rhs


def check_sum_identity(path) -> VerificationReport:
    lhs, rhs = sum_identity_sides(path)
    n = len(path)
    return _report("sum_identity", [n], [abs(lhs - rhs)],
                   IDENTITY_TOL * (1.0 + abs(lhs)) * n, lhs=lhs, rhs=rhs)


def check_harmonic_bounds(n: int) -> VerificationReport:
    """``ln(n+1) <= H_n <= 1 + ln n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    h = math.fsum(1.0 / k for k in range(1, n + 1))
    lower, upper = math.log(n + 1), 1.0 + math.log(n)
    return _report("harmonic_bounds", [n], [max(lower - h, h - upper)], 1e-12,
                   lower=lower, harmonic=h, upper=upper)


# -- capital lower bounds ------------------------------------------------------

def capital_lower_bound(n, avg, c: float):
    """``(c/2)(n avg^2 - ln n) - 3c/2``, a floor on ``log K_n`` for the
    past-average strategy with ``0 < c <= 1/2``. Vectorised over ``n``/``avg``."""
    if np.any(np.asarray(n) < 3):
        raise ValueError("the bound is stated for n >= 3")
    n = np.asarray(n, dtype=float)
    out = 0.5 * c * (n * np.square(avg) - np.log(n)) - 1.5 * c
    return float(out) if out.ndim == 0 else out


def linear_capital_bound(n, ybar_sq, c1: float):
    """``(n/2)||ybar_n||^2 - (c1/2) ln n - 3 c1/2`` with ``ybar = A^{1/2} xbar``."""
    if np.any(np.asarray(n) < 3):
        raise ValueError("the bound is stated for n >= 3")
    n = np.asarray(n, dtype=float)
    out = 0.5 * n * ybar_sq - 0.5 * c1 * np.log(n) - 1.5 * c1
    return float(out) if out.ndim == 0 else out


def _from_three(traj: Trajectory) -> np.ndarray:
    return traj.n >= 3


def check_capital_bound(traj: Trajectory) -> VerificationReport:
    strategy = traj.meta.get("strategy")
    if type(strategy) is not PastAverage:
        raise ValueError(f"capital bound applies to PastAverage runs, got {strategy!r}")
    keep = _from_three(traj)
    ns = traj.n[keep]
    bound = capital_lower_bound(ns, traj.xbar[keep], strategy.c)
    return _report("capital_bound", ns, bound - traj.log_capital[keep], BOUND_TOL * ns,
                   c=strategy.c, min_margin=_min(traj.log_capital[keep] - bound))


def check_linear_bound(traj: Trajectory) -> list[VerificationReport]:
    """Capital floor for the operator strategy and the sandwich
    ``c0 ||xbar||^2 <= ||ybar||^2 <= c1 ||xbar||^2`` at every recorded round."""
    op = traj.meta.get("strategy")
    if not isinstance(op, LinearOperatorSpec):
        raise ValueError(f"linear bound applies to LinearOperatorSpec runs, got {op!r}")
    ybar_sq = np.sum((traj.xbar @ op.sqrt) ** 2, axis=1)
    xbar_sq = np.sum(traj.xbar ** 2, axis=1)
    keep = _from_three(traj)
    ns = traj.n[keep]
    bound = linear_capital_bound(ns, ybar_sq[keep], op.c1)
    floor = _report("linear_capital_bound", ns, bound - traj.log_capital[keep], BOUND_TOL * ns,
                    c0=op.c0, c1=op.c1, min_margin=_min(traj.log_capital[keep] - bound))
    gap = np.maximum(op.c0 * xbar_sq - ybar_sq, ybar_sq - op.c1 * xbar_sq)
    sandwich = _report("spectral_sandwich", traj.n, gap, SPECTRAL_TOL * (1.0 + xbar_sq))
    return [floor, sandwich]


def _min(a) -> float:
    return float(np.min(a)) if len(a) else math.nan


def bound_margin(traj: Trajectory) -> float:
    """Smallest ``log K_n - floor`` over recorded ``n >= 3``; NaN when the
    strategy has no stated floor."""
    strategy = traj.meta.get("strategy")
    if type(strategy) is PastAverage:
        return check_capital_bound(traj).details["min_margin"]
    if isinstance(strategy, LinearOperatorSpec):
        return check_linear_bound(traj)[0].details["min_margin"]
    return math.nan


# -- the rate statistic --------------------------------------------------------

def rate_statistic(n: int, avg) -> float:
    """``sqrt(n) |avg| / sqrt(ln n)``; ``|avg|`` is the Euclidean norm for vectors."""
    if n < 3:
        raise ValueError("statistic is defined for n >= 3")
    return math.sqrt(n) * float(np.linalg.norm(avg)) / math.sqrt(math.log(n))


def rate_statistics(traj: Trajectory) -> np.ndarray:
    """Statistic per recorded row, NaN where ``n < 3``."""
    n = traj.n.astype(float)
    out = np.full(len(n), np.nan)
    keep = n >= 3
    out[keep] = np.sqrt(n[keep]) * traj.xbar_norm()[keep] / np.sqrt(np.log(n[keep]))
    return out


# -- Azuma-Hoeffding -----------------------------------------------------------

def azuma_tail_bound(n: int, epsilon: float) -> float:
    """``min(1, 2 exp(-n eps^2 / 2))`` for martingale differences bounded by 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    return min(1.0, 2.0 * math.exp(-n * epsilon * epsilon / 2.0))


@dataclass
class TailEstimate:
    n: int
    epsilon: float
    trials: int
    hits: int
    frequency: float
    bound: float
    slack: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def monte_carlo_tail(reality, n: int, epsilon: float, trials: int, seed: int = 0,
                     chunk_cells: int = 1 << 21) -> TailEstimate:
    """Fraction of ``trials`` independent length-``n`` paths with ``|xbar_n| >= epsilon``.

    Passes when the frequency is at most the Azuma bound plus three binomial
    standard errors of that bound.
    """
    if not getattr(reality, "mean_zero", False):
        raise ValueError(f"{reality!r} does not have conditional mean zero")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    bound = azuma_tail_bound(n, epsilon)
    rng = np.random.default_rng(seed)
    rows = max(1, chunk_cells // n)
    hits = 0
    done = 0
    while done < trials:
        m = min(rows, trials - done)
        xbar = reality.sample(rng, (m, n)).sum(axis=1) / n
        hits += int(np.count_nonzero(np.abs(xbar) >= epsilon))
        done += m
    freq = hits / trials
    slack = 3.0 * math.sqrt(bound * (1.0 - bound) / trials)
    return TailEstimate(n, epsilon, trials, hits, freq, bound, slack, freq <= bound + slack)


# -- one-sided structure -------------------------------------------------------

BlockKind = Literal["nonnegative", "negative"]


@dataclass(frozen=True)
class Block:
    start: int
    end: int
    kind: BlockKind


@dataclass
class BlockDecomposition:
    """Maximal runs of constant sign of ``xbar_n`` over ``n0..last``."""

    n0: int
    last: int
    blocks: list[Block]

    def tiles(self) -> bool:
        expected = self.n0
        for b in self.blocks:
            if b.start != expected or b.end < b.start:
                return False
            expected = b.end + 1
        return expected == self.last + 1

    def alternates(self) -> bool:
        return all(a.kind != b.kind for a, b in zip(self.blocks, self.blocks[1:]))


def default_n0(avgs: Sequence[float], start: int = 10, tol: float = 0.1) -> int:
    avgs = np.asarray(avgs)
    idx = np.flatnonzero(np.abs(avgs[start:]) <= tol)
    if not idx.size:
        raise ValueError(f"no n >= {start} with |xbar_n| <= {tol}; pass n0 explicitly")
    return int(idx[0]) + start


def decompose_blocks(avgs: Sequence[float], n0: int | None = None) -> BlockDecomposition:
    """Split rounds ``n0..N`` into alternating nonnegative/negative blocks.

    ``avgs[n]`` is ``xbar_n`` for ``n = 0..N``. The first block starts at
    ``n0`` and the last ends at ``N`` whatever the neighbouring signs.
    """
    avgs = np.asarray(avgs, dtype=float)
    last = len(avgs) - 1
    if n0 is None:
        n0 = default_n0(avgs)
    if not 0 <= n0 <= last:
        raise ValueError(f"n0={n0} outside 0..{last}")
    nonneg = avgs[n0:] >= 0
    cuts = np.flatnonzero(nonneg[1:] != nonneg[:-1]) + 1
    starts = np.concatenate([[0], cuts])
    ends = np.concatenate([cuts - 1, [len(nonneg) - 1]])
    blocks = [Block(int(s) + n0, int(e) + n0, "nonnegative" if nonneg[s] else "negative")
              for s, e in zip(starts, ends)]
    return BlockDecomposition(n0, last, blocks)


def _consecutive(traj: Trajectory) -> None:
    if not np.array_equal(traj.n, np.arange(1, len(traj) + 1)):
        raise ValueError("check needs every round recorded (record_every=1)")


def avgs_with_origin(traj: Trajectory) -> np.ndarray:
    """``xbar_0 .. xbar_N`` with ``xbar_0 = 0``."""
    _consecutive(traj)
    return np.concatenate([[0.0], traj.xbar])


def check_one_sided_constancy(traj: Trajectory,
                              decomposition: BlockDecomposition | None = None) -> VerificationReport:
    """Capital of a one-sided run is exactly constant across every block on
    which its bet is forced to zero (negative blocks for the buying side)."""
    strategy = traj.meta.get("strategy")
    if not isinstance(strategy, OneSidedPositive):
        raise ValueError(f"one-sided check needs a one-sided run, got {strategy!r}")
    idle: BlockKind = "negative" if strategy.sign > 0 else "nonnegative"
    avgs = avgs_with_origin(traj)
    if decomposition is None:
        decomposition = decompose_blocks(avgs)
    capital = np.concatenate([[1.0], traj.capital])
    worst, first, checked = 0.0, None, 0
    for b in decomposition.blocks:
        if b.kind != idle:
            continue
        # bets in rounds start+1 .. end+1 see xbar_start .. xbar_end
        stop = min(b.end + 1, decomposition.last)
        seg = capital[b.start:stop + 1]
        drift = float(np.max(np.abs(seg - seg[0])))
        checked += 1
        if drift > 0 and first is None:
            first = b.start
        worst = max(worst, drift)
    return VerificationReport("one_sided_constancy", first is None, worst, worst, first, checked,
                              {"blocks": len(decomposition.blocks), "idle_kind": idle})


def check_overshoot(traj: Trajectory) -> VerificationReport:
    """``|xbar_n| <= 1/n`` whenever ``xbar_{n-1}`` and ``xbar_n`` have strictly opposite signs."""
    avgs = avgs_with_origin(traj)
    n = np.arange(1, len(avgs))
    flip = avgs[:-1] * avgs[1:] < 0
    ns = n[flip]
    return _report("overshoot", ns, np.abs(avgs[1:][flip]) - 1.0 / ns, OVERSHOOT_TOL,
                   sign_changes=int(flip.sum()))


# -- trajectory consistency ----------------------------------------------------

def _dot_rows(f, x):
    return np.sum(f * x, axis=1) if x.ndim == 2 else f * x


def check_multiplicative_consistency(traj: Trajectory) -> VerificationReport:
    """``log K_n`` equals ``sum_i log(1 + f_i . x_i)`` to ``1e-9 n``."""
    _consecutive(traj)
    total = np.cumsum(np.log1p(_dot_rows(traj.fraction, traj.x)))
    return _report("multiplicative", traj.n, np.abs(traj.log_capital - total), 1e-9 * traj.n)


def check_consistency(traj: Trajectory) -> list[VerificationReport]:
    """Row invariants: move bounds, positive capital, ``log_capital`` vs
    ``capital``, and (for unthinned runs) the step and averaging rules."""
    norm_x = np.array([move_norm(r) for r in traj.x]) if traj.is_vector else np.abs(traj.x)
    reports = [
        _report("move_bound", traj.n, norm_x - 1.0, 0.0),
        # strictly positive, subnormals included
        _report("positive_capital", traj.n, -traj.capital, -np.nextafter(0.0, 1.0)),
    ]
    finite = np.isfinite(traj.capital)
    reports.append(_report("log_capital", traj.n[finite],
                           np.abs(traj.log_capital[finite] - np.log(traj.capital[finite])), 1e-9))
    if not np.array_equal(traj.n, np.arange(1, len(traj) + 1)):
        return reports

    n = traj.n.astype(float)
    prev_k = np.concatenate([[1.0], traj.capital[:-1]])
    shape = (1,) + traj.x.shape[1:]
    prev_avg = np.concatenate([np.zeros(shape), traj.xbar[:-1]])
    step_err = np.abs(traj.capital - (prev_k + _dot_rows(traj.bet, traj.x)))
    ok = finite & np.isfinite(prev_k)
    reports.append(_report("step_rule", traj.n[ok], step_err[ok], 1e-12 * traj.capital[ok]))
    col = n[:, None] if traj.is_vector else n
    avg_rule = np.abs(traj.xbar - ((col - 1) * prev_avg + traj.x) / col)
    sum_rule = np.abs(traj.xbar - np.cumsum(traj.x, axis=0) / col)
    if traj.is_vector:
        avg_rule, sum_rule = avg_rule.max(axis=1), sum_rule.max(axis=1)
    reports.append(_report("average_rule", traj.n, avg_rule, 1e-15))
    reports.append(_report("average_sum", traj.n, sum_rule, 1e-12 * n))
    return reports

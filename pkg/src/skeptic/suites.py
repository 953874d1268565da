"""Verification suites behind ``skeptic verify``.

Each suite yields plain dict records (one JSON line each) carrying at least
``suite``, ``name`` and ``passed``. Parameters come from ``verify.*`` config
keys; defaults reproduce the full acceptance-scale runs.
"""
from __future__ import annotations

import itertools
import math
from typing import Callable, Iterator

import numpy as np

from . import analysis as A
from .config import Settings
from .game import run_game
from .reality import (AdversarialMinimizer, BiasedCoin, ConstantBias, FairCoin, RatePath,
                      UniformNoise, VectorUnitBall)
from .strategies import (DyadicDiscrete, LinearOperatorSpec, MixtureAccounts, MomentTable,
                         OneSidedPositive, PastAverage, SymmetricFunctionState, UniformHalf,
                         mixture_bet_accounts, mixture_bet_symmetric, uniform_moment,
                         update_symmetric)

MIXTURE_TOL = 1e-9
Record = dict


def _rec(suite: str, report, **extra) -> Record:
    out = {"suite": suite, **report.to_dict(), **extra}
    return out


def _flag(suite: str, name: str, passed: bool, **extra) -> Record:
    return {"suite": suite, "name": name, "passed": bool(passed), **extra}


# -- identity ------------------------------------------------------------------

def identity(cfg: Settings) -> Iterator[Record]:
    rng = np.random.default_rng(cfg["verify.seed"])
    top = cfg["verify.max_length"]
    for k in range(cfg["verify.paths"]):
        n = int(rng.integers(2, top + 1))
        path = rng.uniform(-3.0, 3.0, n)
        yield _rec("identity", A.check_sum_identity(path), path_index=k, length=n)


# -- capital floor -------------------------------------------------------------

def bound_realities(seeds: int) -> list[tuple[object, int]]:
    """(reality, seed) pairs for the capital-floor suite."""
    cases = [(FairCoin(), s) for s in range(seeds)]
    cases += [(BiasedCoin(0.6), 0), (ConstantBias(0.2), 0), (AdversarialMinimizer(1.0), 0),
              (RatePath(1.2), 0)]
    return cases


def bound(cfg: Settings) -> Iterator[Record]:
    horizon = cfg["verify.horizon"]
    for c in cfg["verify.c"]:
        for reality, seed in bound_realities(cfg["verify.seeds"]):
            traj = run_game(PastAverage(c), reality, horizon, seed=seed)
            yield _rec("bound", A.check_capital_bound(traj), c=c, reality=repr(reality),
                       seed=seed, final_log_capital=traj.final_log_capital())


# -- one-sided -----------------------------------------------------------------

def one_sided(cfg: Settings) -> Iterator[Record]:
    horizon, c = cfg["verify.horizon"], 0.5
    for seed in range(cfg["verify.seeds"]):
        traj = run_game(OneSidedPositive(c), FairCoin(), horizon, seed=seed)
        avgs = A.avgs_with_origin(traj)
        blocks = A.decompose_blocks(avgs)
        yield _flag("one_sided", "block_structure", blocks.tiles() and blocks.alternates(),
                    seed=seed, blocks=len(blocks.blocks), n0=blocks.n0)
        yield _rec("one_sided", A.check_one_sided_constancy(traj, blocks), seed=seed)
        yield _rec("one_sided", A.check_overshoot(traj), seed=seed)
    rate_horizon = cfg["verify.rate_horizon"]
    final = {}
    for a in (1.0, 1.5):
        traj = run_game(OneSidedPositive(c), RatePath(a), rate_horizon, record_every=rate_horizon)
        final[a] = traj.final_log_capital()
    yield _flag("one_sided", "rate_separation", final[1.5] > final[1.0],
                log_capital_a1=final[1.0], log_capital_a15=final[1.5], horizon=rate_horizon)


# -- linear protocol -----------------------------------------------------------

def random_operator(rng: np.random.Generator, dim: int, lo: float = 0.1,
                    hi: float = 0.5) -> np.ndarray:
    """Symmetric matrix with eigenvalues drawn uniformly from [lo, hi]."""
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    A = (q * rng.uniform(lo, hi, dim)) @ q.T
    return 0.5 * (A + A.T)


def linear_realities() -> list[tuple[str, Callable[[int], VectorUnitBall]]]:
    return [
        ("fair_coin/random", lambda d: VectorUnitBall(FairCoin(), "random")),
        ("constant_bias/rotating",
         lambda d: VectorUnitBall(ConstantBias(0.3), "rotating" if d > 1 else "fixed", period=50)),
        ("uniform_noise/fixed", lambda d: VectorUnitBall(UniformNoise(), "fixed", axis=d - 1)),
        ("rate_path/fixed", lambda d: VectorUnitBall(RatePath(1.2), "fixed")),
        ("adversarial", lambda d: VectorUnitBall(AdversarialMinimizer(1.0))),
    ]


def reduction_error(horizon: int, seed: int = 0, dim: int = 3) -> float:
    """Worst per-round relative capital gap between ``A = 0.5 I`` and ``PastAverage(0.5)``
    on the same fair-coin stream along coordinate 1."""
    vec = run_game(LinearOperatorSpec(0.5 * np.eye(dim)), VectorUnitBall(FairCoin(), "fixed"),
                   horizon, seed=seed)
    sca = run_game(PastAverage(0.5), FairCoin(), horizon, seed=seed)
    return float(np.max(np.abs(vec.capital - sca.capital) / sca.capital))


def linear(cfg: Settings) -> Iterator[Record]:
    horizon = cfg["verify.linear_horizon"]
    err = reduction_error(horizon, cfg["verify.seed"])
    yield _flag("linear", "scalar_reduction", err <= 1e-12, max_relative_gap=err)
    rng = np.random.default_rng(cfg["verify.seed"])
    for k in range(cfg["verify.matrices"]):
        dim = int(rng.integers(1, cfg["verify.max_dim"] + 1))
        op = LinearOperatorSpec(random_operator(rng, dim))
        for label, make in linear_realities():
            traj = run_game(op, make(dim), horizon, seed=k)
            for report in A.check_linear_bound(traj):
                yield _rec("linear", report, matrix=k, dim=dim, reality=label)


# -- mixture -------------------------------------------------------------------

def subset_sums(x, k: int) -> float:
    """``e_k`` by summing products over all size-``k`` subsets."""
    return math.fsum(math.prod(s) for s in itertools.combinations(x, k))


def mixture_pair(mixing, history) -> tuple[float, float, float]:
    """(accounts bet, symmetric bet, cancellation scale) after ``history``."""
    accounts = MixtureAccounts.of(mixing)
    sym = SymmetricFunctionState()
    for x in history:
        accounts.update(x)
        sym = update_symmetric(sym, x)
    moments = MomentTable.of(mixing, len(history) + 1)
    return mixture_bet_accounts(accounts), mixture_bet_symmetric(moments, sym), accounts.scale()


def mixture_agrees(a: float, b: float, scale: float) -> bool:
    return abs(a - b) <= MIXTURE_TOL * max(abs(a), abs(b), scale)


def mixture(cfg: Settings) -> Iterator[Record]:
    rng = np.random.default_rng(cfg["verify.seed"])
    top = cfg["verify.mixture_n"]
    for label, mixing in (("uniform_half", UniformHalf(64)), ("dyadic", DyadicDiscrete(20))):
        worst, failures = 0.0, 0
        for _ in range(cfg["verify.mixture_paths"]):
            n = int(rng.integers(1, top + 1))
            a, b, scale = mixture_pair(mixing, rng.uniform(-1.0, 1.0, n - 1))
            gap = abs(a - b) / max(abs(a), abs(b), scale)
            worst = max(worst, gap)
            failures += not mixture_agrees(a, b, scale)
        yield _flag("mixture", f"forms_agree/{label}", failures == 0, max_relative_gap=worst,
                    paths=cfg["verify.mixture_paths"])
    yield _flag("mixture", "uniform_moments", uniform_moment(2) == 1 / 12 and uniform_moment(4) == 1 / 80,
                mu2=uniform_moment(2), mu4=uniform_moment(4))
    worst = 0.0
    for n in range(1, cfg["verify.subset_n"] + 1):
        x = rng.uniform(-1.0, 1.0, n)
        sym = SymmetricFunctionState()
        for v in x:
            sym = update_symmetric(sym, v)
        for k in range(n + 1):
            worst = max(worst, abs(sym.e[k] - subset_sums(x, k)))
    yield _flag("mixture", "symmetric_vs_subsets", worst <= 1e-12, max_abs_gap=worst)


# -- Azuma ---------------------------------------------------------------------

def azuma(cfg: Settings) -> Iterator[Record]:
    for reality in (FairCoin(), UniformNoise()):
        est = A.monte_carlo_tail(reality, cfg["verify.n"], cfg["verify.epsilon"],
                                 cfg["verify.trials"], cfg["verify.seed"])
        yield {"suite": "azuma", "name": f"tail/{reality.kind}", **est.to_dict()}


SUITES: dict[str, Callable[[Settings], Iterator[Record]]] = {
    "identity": identity,
    "bound": bound,
    "one-sided": one_sided,
    "linear": linear,
    "mixture": mixture,
    "azuma": azuma,
}


def run_suite(name: str, cfg: Settings) -> Iterator[Record]:
    if name == "all":
        for suite in SUITES.values():
            yield from suite(cfg)
        return
    if name not in SUITES:
        raise KeyError(name)
    yield from SUITES[name](cfg)

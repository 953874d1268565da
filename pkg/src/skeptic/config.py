"""Run configuration: a flat ``key = value`` text file with dotted keys.

    # comment
    strategy.kind = past_average
    strategy.c = 0.5
    reality.kind = rate_path
    reality.a = 1.2
    run.horizon = 100000

Every key, its type and its default is listed in ``KEYS``. Unknown keys and
out-of-range values raise ``ConfigError`` naming the offending field, before
any run starts.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from . import reality as R
from . import strategies as S


class ConfigError(ValueError):
    pass


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _str_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


# key -> (parser, default)
KEYS: dict[str, tuple] = {
    "strategy.kind": (str, "past_average"),
    "strategy.c": (float, 0.5),
    "strategy.epsilon": (float, 0.0),
    "strategy.mixture": (str, "uniform_half"),
    "strategy.nodes": (int, 64),
    "strategy.truncation": (int, 20),
    "strategy.form": (str, "accounts"),
    "strategy.max_n": (int, 64),
    "strategy.matrix_path": (str, None),
    "reality.kind": (str, "fair_coin"),
    "reality.p": (float, 0.5),
    "reality.b": (float, 0.0),
    "reality.a": (float, 1.0),
    "reality.n_start": (int, 3),
    "reality.magnitude": (float, 1.0),
    "reality.inner": (str, "fair_coin"),
    "reality.direction": (str, "fixed"),
    "reality.axis": (int, 0),
    "reality.period": (int, 16),
    "run.horizon": (int, 1000),
    "run.seed": (int, 0),
    "run.record_every": (int, 1),
    "run.out": (str, None),
    "run.checks": (_str_list, []),
    "sweep.c": (_float_list, None),
    "sweep.a": (_float_list, None),
    "sweep.horizon": (_int_list, None),
    "sweep.seed": (_int_list, None),
    "verify.seed": (int, 0),
    "verify.paths": (int, 1000),
    "verify.max_length": (int, 10_000),
    "verify.c": (_float_list, [0.05, 0.1, 0.25, 0.5]),
    "verify.horizon": (int, 100_000),
    "verify.seeds": (int, 20),
    "verify.rate_horizon": (int, 1_000_000),
    "verify.linear_horizon": (int, 10_000),
    "verify.matrices": (int, 5),
    "verify.max_dim": (int, 8),
    "verify.mixture_paths": (int, 100),
    "verify.mixture_n": (int, 30),
    "verify.subset_n": (int, 12),
    "verify.n": (int, 1000),
    "verify.epsilon": (float, 0.1),
    "verify.trials": (int, 100_000),
}

CHECKS = ("consistency", "multiplicative", "capital_bound", "linear_bound",
          "one_sided", "overshoot")
CHECK_STRATEGY = {
    "capital_bound": ("past_average",),
    "linear_bound": ("linear",),
    "one_sided": ("one_sided_positive", "one_sided_negative"),
}
UNTHINNED_CHECKS = ("multiplicative", "one_sided", "overshoot")


def parse_text(text: str) -> dict[str, str]:
    """Raw ``key -> value`` strings; later duplicates override earlier ones."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key = key.strip()
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


@dataclass
class Settings:
    """Typed view of a parsed config; missing keys fall back to ``KEYS`` defaults."""

    raw: dict[str, str] = field(default_factory=dict)
    base_dir: str = "."

    def __getitem__(self, key: str):
        parser, default = KEYS[key]
        if key not in self.raw:
            return default
        try:
            return parser(self.raw[key])
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {self.raw[key]!r} ({exc})") from None

    def __contains__(self, key: str) -> bool:
        return key in self.raw

    def path(self, key: str) -> str | None:
        value = self[key]
        if value is None or os.path.isabs(value):
            return value
        return os.path.join(self.base_dir, value)


def load(path: str | None) -> Settings:
    if path is None:
        return Settings()
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
    return Settings(parse_text(text), os.path.dirname(os.path.abspath(path)))


def load_matrix(path: str) -> np.ndarray:
    """Whitespace-delimited square matrix; symmetry is checked when the operator is built."""
    try:
        A = np.loadtxt(path, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"strategy.matrix_path: cannot load {path!r}: {exc}") from None
    return A


def _field(key: str, build, *args):
    try:
        return build(*args)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{key}: {exc}") from None


def build_strategy(cfg: Settings, c: float | None = None):
    kind = cfg["strategy.kind"]
    c = cfg["strategy.c"] if c is None else c
    if kind == "fixed_epsilon":
        return _field("strategy.epsilon", S.FixedEpsilon, cfg["strategy.epsilon"])
    if kind == "past_average":
        return _field("strategy.c", S.PastAverage, c)
    if kind == "one_sided_positive":
        return _field("strategy.c", S.OneSidedPositive, c)
    if kind == "one_sided_negative":
        return _field("strategy.c", S.OneSidedNegative, c)
    if kind == "mixture":
        name = cfg["strategy.mixture"]
        if name == "uniform_half":
            mixing = _field("strategy.nodes", S.UniformHalf, cfg["strategy.nodes"])
        elif name == "dyadic":
            mixing = _field("strategy.truncation", S.DyadicDiscrete, cfg["strategy.truncation"])
        else:
            raise ConfigError(f"strategy.mixture: unknown mixing distribution {name!r}")
        return _field("strategy.form", S.Mixture, mixing, cfg["strategy.form"], cfg["strategy.max_n"])
    if kind == "linear":
        path = cfg.path("strategy.matrix_path")
        if path is None:
            raise ConfigError("strategy.matrix_path: required for strategy.kind = linear")
        return _field("strategy.matrix_path", S.LinearOperatorSpec, load_matrix(path))
    raise ConfigError(f"strategy.kind: unknown strategy {kind!r}")


def _scalar_reality(cfg: Settings, kind: str, a: float | None, key: str):
    if kind == "fair_coin":
        return R.FairCoin()
    if kind == "biased_coin":
        return _field("reality.p", R.BiasedCoin, cfg["reality.p"])
    if kind == "uniform_noise":
        return R.UniformNoise()
    if kind == "constant_bias":
        return _field("reality.b", R.ConstantBias, cfg["reality.b"])
    if kind == "rate_path":
        a = cfg["reality.a"] if a is None else a
        return _field("reality.a", R.RatePath, a, cfg["reality.n_start"])
    if kind == "adversarial":
        return _field("reality.magnitude", R.AdversarialMinimizer, cfg["reality.magnitude"])
    raise ConfigError(f"{key}: unknown reality {kind!r}")


def build_reality(cfg: Settings, a: float | None = None):
    kind = cfg["reality.kind"]
    if kind == "vector_unit_ball":
        inner = _scalar_reality(cfg, cfg["reality.inner"], a, "reality.inner")
        return _field("reality.direction", R.VectorUnitBall, inner, cfg["reality.direction"],
                      cfg["reality.axis"], cfg["reality.period"])
    return _scalar_reality(cfg, kind, a, "reality.kind")


@dataclass
class RunConfig:
    strategy: object
    reality: object
    horizon: int
    seed: int
    record_every: int
    out: str | None
    checks: list[str]


def run_config(cfg: Settings, seed: int | None = None, out: str | None = None) -> RunConfig:
    strategy = build_strategy(cfg)
    reality = build_reality(cfg)
    if (strategy.dim is None) != (reality.kind != "vector_unit_ball"):
        raise ConfigError("reality.kind: vector strategies need vector_unit_ball and vice versa")
    horizon, record_every = cfg["run.horizon"], cfg["run.record_every"]
    if horizon < 1:
        raise ConfigError("run.horizon: must be >= 1")
    if record_every < 1:
        raise ConfigError("run.record_every: must be >= 1")
    checks = cfg["run.checks"]
    for name in checks:
        if name not in CHECKS:
            raise ConfigError(f"run.checks: unknown check {name!r} (known: {', '.join(CHECKS)})")
        needs = CHECK_STRATEGY.get(name)
        if needs and strategy.kind not in needs:
            raise ConfigError(f"run.checks: {name} needs strategy.kind in {needs}")
        if name in UNTHINNED_CHECKS and record_every != 1:
            raise ConfigError(f"run.checks: {name} needs run.record_every = 1")
    if strategy.dim is not None and reality.inner.kind != "adversarial":
        if not 0 <= reality.axis < strategy.dim:
            raise ConfigError(f"reality.axis: {reality.axis} out of range for dim={strategy.dim}")
        if reality.direction == "rotating" and strategy.dim < 2:
            raise ConfigError("reality.direction: rotating needs a matrix of size >= 2")
    return RunConfig(
        strategy=strategy,
        reality=reality,
        horizon=horizon,
        seed=cfg["run.seed"] if seed is None else seed,
        record_every=record_every,
        out=out if out is not None else cfg.path("run.out"),
        checks=checks,
    )

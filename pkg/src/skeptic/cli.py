"""``skeptic simulate | verify | sweep``.

Exit codes: 0 success, 1 a requested check failed, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analysis as A
from .config import ConfigError, Settings, build_reality, build_strategy, load, run_config
from .csvio import write_trajectory_csv
from .game import GameError, run_game
from .suites import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    return repr(o)


def _dumps(record: dict) -> str:
    return json.dumps(record, default=_json_default, sort_keys=False)


@contextlib.contextmanager
def _output(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _run_checks(traj, names) -> list:
    reports = []
    for name in names:
        if name == "consistency":
            reports += A.check_consistency(traj)
        elif name == "multiplicative":
            reports.append(A.check_multiplicative_consistency(traj))
        elif name == "capital_bound":
            reports.append(A.check_capital_bound(traj))
        elif name == "linear_bound":
            reports += A.check_linear_bound(traj)
        elif name == "one_sided":
            reports.append(A.check_one_sided_constancy(traj))
        elif name == "overshoot":
            reports.append(A.check_overshoot(traj))
    return reports


def cmd_simulate(args, cfg: Settings) -> int:
    rc = run_config(cfg, seed=args.seed, out=args.out)
    traj = run_game(rc.strategy, rc.reality, rc.horizon, rc.seed, rc.record_every)
    with _output(rc.out) as fh:
        write_trajectory_csv(traj, fh)
    stats = A.rate_statistics(traj)
    max_stat = float(np.nanmax(stats)) if np.isfinite(stats).any() else math.nan
    info = sys.stdout if rc.out else sys.stderr
    print(f"final_log_capital={traj.final_log_capital():.17g}", file=info)
    print(f"max_stat={max_stat:.17g}", file=info)
    try:
        reports = _run_checks(traj, rc.checks)
    except ValueError as exc:
        raise ConfigError(f"run.checks: {exc}") from None
    for r in reports:
        print(_dumps(r.to_dict()), file=info)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_verify(args, cfg: Settings) -> int:
    if args.seed is not None:
        cfg = Settings({**cfg.raw, "verify.seed": str(args.seed)}, cfg.base_dir)
    ok = True
    with _output(args.out) as fh:
        for record in run_suite(args.suite, cfg):
            ok &= bool(record["passed"])
            fh.write(_dumps(record) + "\n")
            fh.flush()
    return EXIT_OK if ok else EXIT_FAIL


SWEEP_HEADER = ["c", "a", "horizon", "seed", "final_log_capital", "max_stat", "min_bound_margin"]


@dataclass(frozen=True)
class Cell:
    strategy: object
    reality: object
    horizon: int
    seed: int
    record_every: int
    c: float
    a: float


def _run_cell(cell: Cell) -> list[str]:
    traj = run_game(cell.strategy, cell.reality, cell.horizon, cell.seed, cell.record_every)
    stats = A.rate_statistics(traj)
    max_stat = float(np.nanmax(stats)) if np.isfinite(stats).any() else math.nan
    margin = A.bound_margin(traj)
    fmt = lambda v: "" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.17g}"
    return [fmt(cell.c), fmt(cell.a), str(cell.horizon), str(cell.seed),
            fmt(traj.final_log_capital()), fmt(max_stat), fmt(margin)]


def _rate_a(reality) -> float | None:
    inner = getattr(reality, "inner", reality)
    return inner.a if inner.kind == "rate_path" else None


def sweep_cells(cfg: Settings, seed_override: int | None = None) -> list[Cell]:
    """Grid cells in deterministic order: c, then a, then horizon, then seed."""
    base = run_config(cfg, seed=seed_override)
    has_c = hasattr(base.strategy, "c")
    is_rate = _rate_a(base.reality) is not None
    if "sweep.c" in cfg and not has_c:
        raise ConfigError("sweep.c: strategy has no c parameter")
    if "sweep.a" in cfg and not is_rate:
        raise ConfigError("sweep.a: reality is not a rate path")
    cs = cfg["sweep.c"] if "sweep.c" in cfg else [getattr(base.strategy, "c", None)]
    a_values = cfg["sweep.a"] if "sweep.a" in cfg else [_rate_a(base.reality)]
    horizons = cfg["sweep.horizon"] if "sweep.horizon" in cfg else [base.horizon]
    seeds = cfg["sweep.seed"] if "sweep.seed" in cfg else [base.seed]
    for h in horizons:
        if h < 1:
            raise ConfigError("sweep.horizon: values must be >= 1")
    cells = []
    for c, a, h, s in itertools.product(cs, a_values, horizons, seeds):
        strategy = build_strategy(cfg, c=c) if c is not None else base.strategy
        reality = build_reality(cfg, a=a) if a is not None else base.reality
        cells.append(Cell(strategy, reality, h, s, base.record_every, c, a))
    return cells


def cmd_sweep(args, cfg: Settings) -> int:
    cells = sweep_cells(cfg, args.seed)
    if args.jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_run_cell, cells))
    else:
        rows = [_run_cell(cell) for cell in cells]
    out = args.out if args.out is not None else cfg.path("run.out")
    with _output(out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        writer.writerows(rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skeptic", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--seed", type=int, help="overrides run.seed / verify.seed")
    common.add_argument("--jobs", type=int, default=1, help="parallel sweep cells")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="play one game, write a trajectory CSV")
    verify = sub.add_parser("verify", parents=[common], help="run a verification suite")
    verify.add_argument("suite", choices=[*SUITES, "all"])
    sub.add_parser("sweep", parents=[common], help="run a parameter grid, write an aggregate CSV")
    return parser


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        cfg = load(args.config)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GameError, OverflowError) as exc:
        print(f"run error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

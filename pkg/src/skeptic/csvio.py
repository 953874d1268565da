"""Trajectory CSV format.

Scalar games use the header ``n,x,xbar,bet,capital,log_capital,stat``.
Vector games use ``n,xbar_norm,x_1..x_m,xbar_1..xbar_m,bet_1..bet_m,capital,log_capital,stat``.
Floats are written with 17 significant digits so they re-parse bit-exactly;
``stat`` is empty for ``n < 3``.
"""
from __future__ import annotations

import csv
import math
from typing import IO

import numpy as np

from .analysis import rate_statistics
from .game import Trajectory

SCALAR_HEADER = ["n", "x", "xbar", "bet", "capital", "log_capital", "stat"]


def _fmt(v: float) -> str:
    if math.isnan(v):
        return ""
    return f"{v:.17g}"


def header_for(dim: int | None) -> list[str]:
    if dim is None:
        return list(SCALAR_HEADER)
    cols = ["n", "xbar_norm"]
    for name in ("x", "xbar", "bet"):
        cols += [f"{name}_{i}" for i in range(1, dim + 1)]
    return cols + ["capital", "log_capital", "stat"]


def write_trajectory_csv(traj: Trajectory, fh: IO[str]) -> None:
    stat = rate_statistics(traj)
    fh.write(",".join(header_for(traj.dim)) + "\n")
    if traj.is_vector:
        norm = traj.xbar_norm()
        for j in range(len(traj)):
            cells = [str(int(traj.n[j])), _fmt(norm[j])]
            cells += [_fmt(v) for v in traj.x[j]]
            cells += [_fmt(v) for v in traj.xbar[j]]
            cells += [_fmt(v) for v in traj.bet[j]]
            cells += [_fmt(traj.capital[j]), _fmt(traj.log_capital[j]), _fmt(stat[j])]
            fh.write(",".join(cells) + "\n")
        return
    rows = zip(traj.n.tolist(), traj.x.tolist(), traj.xbar.tolist(), traj.bet.tolist(),
               traj.capital.tolist(), traj.log_capital.tolist(), stat.tolist())
    fh.writelines(
        f"{n},{_fmt(x)},{_fmt(xb)},{_fmt(b)},{_fmt(k)},{_fmt(lk)},{_fmt(s)}\n"
        for n, x, xb, b, k, lk, s in rows
    )


def read_trajectory_csv(fh: IO[str], meta: dict | None = None) -> Trajectory:
    """Parse a trajectory CSV.

    ``fraction`` is not stored; it is rebuilt as ``bet / K_{n-1}`` for rows
    whose predecessor round is present, NaN otherwise.
    """
    reader = csv.reader(fh)
    header = next(reader)
    body = [[float(c) if c else math.nan for c in row] for row in reader]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    col = {name: i for i, name in enumerate(header)}
    n = data[:, col["n"]].astype(np.int64)
    capital = data[:, col["capital"]]
    log_capital = data[:, col["log_capital"]]
    if header == SCALAR_HEADER:
        x, xbar, bet = data[:, 1], data[:, 2], data[:, 3]
    else:
        dim = (len(header) - 5) // 3
        if header != header_for(dim):
            raise ValueError("unrecognised trajectory header")
        x = data[:, 2:2 + dim]
        xbar = data[:, 2 + dim:2 + 2 * dim]
        bet = data[:, 2 + 2 * dim:2 + 3 * dim]
    prev_k = np.concatenate([[1.0], capital[:-1]])
    prev_n = np.concatenate([[0], n[:-1]])
    known = (prev_n == n - 1)
    scale = np.where(known, prev_k, np.nan)
    fraction = bet / (scale[:, None] if bet.ndim == 2 else scale)
    return Trajectory(n, x, xbar, bet, capital, log_capital, fraction, dict(meta or {}))

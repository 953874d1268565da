"""How often a fair coin pushes the rate statistic past a threshold.

For each seed, records the largest value of ``sqrt(n)|xbar_n| / sqrt(ln n)``
over ``n`` in ``[n_min, horizon]``, then prints quantiles across seeds and
the share of seeds that ever crossed ``--threshold``.
"""
import argparse

import numpy as np

from skeptic import FairCoin, PastAverage, run_game
from skeptic.analysis import rate_statistics


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--horizon", type=int, default=1_000_000)
    p.add_argument("--n-min", type=int, default=1000)
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--threshold", type=float, default=1.0)
    args = p.parse_args()
    peaks = []
    for seed in range(args.seeds):
        traj = run_game(PastAverage(0.5), FairCoin(), args.horizon, seed=seed)
        peaks.append(np.nanmax(rate_statistics(traj)[args.n_min - 1:]))
    peaks = np.array(peaks)
    for q in (0.1, 0.5, 0.9, 1.0):
        print(f"quantile {q:4.2f}: {np.quantile(peaks, q):.4f}")
    print(f"crossed {args.threshold}: {np.mean(peaks > args.threshold):.2%} of {args.seeds} seeds")


if __name__ == "__main__":
    main()

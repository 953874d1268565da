"""Buying-only and selling-only past-average betting on rate paths.

Rate paths keep the running average positive, so the buying-only player
matches the two-sided one bet for bet while the selling-only player never
stakes anything. Prints the final log-capital of each for every ``a``.
"""
import argparse

from skeptic import OneSidedNegative, OneSidedPositive, PastAverage, RatePath, run_game


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--horizon", type=int, default=1_000_000)
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--a", type=float, nargs="+", default=[0.8, 1.0, 1.1, 1.2, 1.3, 1.5, 1.8])
    args = p.parse_args()
    every = max(1, args.horizon // 100)
    print(f"{'a':>6} {'two-sided':>12} {'buy-only':>12} {'sell-only':>12}")
    for a in args.a:
        row = [run_game(spec, RatePath(a), args.horizon, record_every=every).final_log_capital()
               for spec in (PastAverage(args.c), OneSidedPositive(args.c), OneSidedNegative(args.c))]
        print(f"{a:6.3g} " + " ".join(f"{v:12.4f}" for v in row))


if __name__ == "__main__":
    main()

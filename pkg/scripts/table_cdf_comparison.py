#!/usr/bin/env python3
"""Compare P(L_n <= l) across methods at small n: exact rationals,
saddle-point formula, Monte Carlo, and the bare soft-edge limit.

Usage: python scripts/table_cdf_comparison.py [--n 20] [--trials 5000000]
"""

import argparse
import math

import lisdist as L


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--trials", type=int, default=5_000_000)
    ap.add_argument("--seed", type=int, default=20)
    args = ap.parse_args()

    n = args.n
    table = L.exact_distribution_table(n)
    mc = L.monte_carlo_cdf(n, args.trials, args.seed, workers=4)
    print(f"l, exact, stirling, montecarlo, soft_edge_limit   (n={n}, "
          f"T={args.trials:.0e})")
    for l in range(1, n):
        exact = float(table.cdf(n, l))
        if exact > 1 - 1e-12:
            break
        st = L.stirling_cdf(n, l).cdf
        f2 = L.f2_cdf(float(L.t_scaled(n, l)))
        print(f"{l:3d}, {exact:.3e}, {st:.3e}, {mc.cdf(l):.3e}, {f2:.3e}")


if __name__ == "__main__":
    main()

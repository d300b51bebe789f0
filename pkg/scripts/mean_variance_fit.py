#!/usr/bin/env python3
"""Fit asymptotic expansions of E(L_n) and Var(L_n) to exact-table data on
two windows and report per-coefficient agreement (the stability protocol).

Usage: python scripts/mean_variance_fit.py [--N 200] [--num-terms 6]
       [--windows 100 200 120 200]
"""

import argparse

import lisdist as L


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=200)
    ap.add_argument("--num-terms", type=int, default=6)
    ap.add_argument("--windows", type=int, nargs=4,
                    default=(100, 200, 120, 200))
    args = ap.parse_args()

    table = L.exact_distribution_table(args.N)
    w1, w2 = tuple(args.windows[:2]), tuple(args.windows[2:])
    refs = {"mean": (-1.7710868074, 0.06583238, 0.2612227),
            "variance": (0.8131947928, -1.20720507, 0.567156)}
    for kind in ("mean", "variance"):
        f1, f2, digits = L.fit_two_windows(table, w1, w2, args.num_terms,
                                           kind=kind)
        print(f"{kind} fit, windows {w1} / {w2}:")
        for k in range(args.num_terms):
            ref = refs[kind][k] if k < 3 else None
            ref_s = f"  (soft-edge value {ref})" if ref is not None else ""
            print(f"  c{k}: {f1.coefficients[k]:+.10f} vs "
                  f"{f2.coefficients[k]:+.10f}  [{digits[k]} matching digits]"
                  f"{ref_s}")


if __name__ == "__main__":
    main()

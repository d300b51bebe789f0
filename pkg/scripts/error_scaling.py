#!/usr/bin/env python3
"""Error-decay study: max_l |approx - exact| against n for the saddle-point
formula and the soft-edge limit, with fitted power laws.

Emits CSV (n, stirling_err, limit_err) plus a fitted-exponent summary.

Usage: python scripts/error_scaling.py [--n-values 25 50 100 200] [--out F]
"""

import argparse
import sys

import lisdist as L


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-values", type=int, nargs="+",
                    default=[25, 50, 100, 200])
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    N = max(args.n_values)
    table = L.exact_distribution_table(N)
    rows = []
    for n in args.n_values:
        errs = L.max_abs_errors(n, table)
        rows.append((n, errs["stirling"], errs["limit"]))

    out = open(args.out, "w") if args.out else sys.stdout
    out.write("n,stirling_err,limit_err\n")
    for n, se, le in rows:
        out.write(f"{n},{se!r},{le!r}\n")
    c_s, a_s = L.fit_power_law([r[0] for r in rows], [r[1] for r in rows])
    c_l, a_l = L.fit_power_law([r[0] for r in rows], [r[2] for r in rows])
    out.write(f"# stirling ~ {c_s:.3f} n^-{a_s:.3f}   "
              f"(conjectured exponent 2/3)\n")
    out.write(f"# limit    ~ {c_l:.3f} n^-{a_l:.3f}   (proven-rate exponent 1/3)\n")
    if args.out:
        out.close()


if __name__ == "__main__":
    main()

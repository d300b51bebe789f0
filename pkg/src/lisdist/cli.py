"""Command-line interface.

Every subcommand emits machine-readable rows (CSV or JSON) carrying
provenance: backend, tolerance and package version. Identical
configuration and seed produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .config import CACHE_DIR_ENV, DEFAULT, VERSION
from .errors import LisdistError


def _provenance(args, **extra):
    p = {"version": VERSION, "tol": args.tol}
    p.update(extra)
    return p


def _emit(args, command, rows, provenance):
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        if args.format == "json":
            doc = {"command": command, "provenance": provenance, "rows": rows}
            json.dump(doc, out, sort_keys=True, indent=1)
            out.write("\n")
        else:
            import csv
            w = csv.writer(out)
            if rows:
                cols = list(rows[0])
                w.writerow(cols)
                for r in rows:
                    w.writerow([_render(r[c], args.digits) for c in cols])
    finally:
        if args.out:
            out.close()


def _render(v, digits):
    if isinstance(v, float) and digits:
        return f"{v:.{digits}g}"
    return v


def _parse_lrange(spec: str):
    if ".." in spec:
        a, b = spec.split("..", 1)
        return int(a), int(b)
    v = int(spec)
    return v, v


# -- subcommand implementations ---------------------------------------------------

def _cmd_exact_table(args):
    from .series import exact_distribution_table
    cap = (DEFAULT.limits.paper_scale_table_max_n if args.paper_scale
           else DEFAULT.limits.exact_table_max_n)
    if args.N > cap:
        raise LisdistError(
            f"N={args.N} exceeds the cap {cap}; pass --paper-scale (and wait)"
            if not args.paper_scale else f"N={args.N} exceeds the cap {cap}")
    precision = "auto" if args.precision is None else args.precision
    table = exact_distribution_table(args.N, precision, threads=args.threads)
    if args.out and args.format == "json":
        table.to_json(args.out)
    elif args.out:
        table.to_csv(args.out, digits=args.digits or 15)
    else:
        sys.stdout.write(table.to_csv_string(digits=args.digits or 15))
    return 0


def _cmd_cdf(args):
    from .stirling import stirling_profile
    l_lo, l_hi = _parse_lrange(args.lrange)
    _, cdfv, _, results = stirling_profile(args.n, l_lo, l_hi, args.tol)
    rows = [{"n": args.n, "l": res.l, "value": res.cdf,
             "log10_value": res.log10_cdf(), "err_estimate": res.err_estimate,
             "backend": res.backend, "r": res.r} for res in results]
    _emit(args, "cdf", rows, _provenance(args))
    return 0


def _cmd_pdf(args):
    from .stirling import monotonicity_violations, stirling_profile
    l_lo, l_hi = _parse_lrange(args.lrange)
    _, _, pdfv, results = stirling_profile(args.n, l_lo, l_hi, args.tol)
    rows = [{"n": args.n, "l": res.l, "value": float(p),
             "err_estimate": res.err_estimate, "backend": res.backend,
             "r": res.r} for p, res in zip(pdfv, results)]
    viol = monotonicity_violations(results)
    _emit(args, "pdf", rows, _provenance(args, monotonicity_violations=len(viol)))
    return 0


def _cmd_montecarlo(args):
    from .oracle import monte_carlo_cdf
    mc = monte_carlo_cdf(args.n, args.trials, args.seed, workers=args.threads)
    rows = [{"n": args.n, "l": l, "cdf": mc.cdf(l), "pdf": mc.pdf(l),
             "stderr": mc.cdf_stderr(l)} for l in range(1, args.n + 1)]
    _emit(args, "montecarlo", rows,
          _provenance(args, seed=args.seed, trials=args.trials,
                      workers=args.threads, rng="philox"))
    return 0


def _cmd_f2(args):
    from .kernels import airy_f2
    ev = airy_f2(args.s, args.tol, max_deriv=args.max_deriv)
    row = {"s": args.s, "F2": ev.F2, "err_estimate": ev.err_estimate,
           "deriv_method": ev.deriv_method}
    for k, d in enumerate(ev.derivs, start=1):
        row[f"F2_d{k}"] = d
    _emit(args, "f2", [row], _provenance(args))
    return 0


def _cmd_hard_edge(args):
    from .kernels import hard_edge_eval
    if args.s_grid:
        lo, hi, count = args.s_grid
        ss = [lo + (hi - lo) * i / (count - 1) for i in range(int(count))]
    else:
        ss = [args.s]
    rows = []
    for s in ss:
        ev = hard_edge_eval(args.alpha, float(s), args.tol, backend=args.backend)
        rows.append({"alpha": args.alpha, "s": s, "g": ev.g, "log_g": ev.log_g,
                     "v": ev.v, "u": ev.u, "err_estimate": ev.err_estimate,
                     "backend": ev.backend})
    _emit(args, "hard-edge", rows, _provenance(args))
    return 0


def _cmd_residuals(args):
    from .corrections import scaled_residuals
    table = None
    if args.source == "exact":
        from .series import exact_distribution_table
        table = exact_distribution_table(min(args.n, DEFAULT.limits.exact_table_max_n))
    rs = scaled_residuals(args.n, args.order, args.source, kind=args.kind,
                          table=table, tol=args.tol)
    rows = [{"t": t, "value": v} for t, v in rs.points]
    _emit(args, "residuals", rows,
          _provenance(args, n=args.n, order=args.order, kind=args.kind,
                      source=args.source,
                      scaling_exponent=rs.scaling_exponent))
    return 0


def _cmd_fit_corrections(args):
    from .corrections import fit_correction, scaled_residuals
    ns = args.n or ([10 ** 6] if not args.paper_scale else [10 ** 10])
    pts = []
    for n in ns:
        rs = scaled_residuals(n, 0, "stirling", kind="cdf",
                              t_range=tuple(args.interval), tol=args.tol)
        pts.extend(rs.points)
    fit = fit_correction(pts, args.degree, tuple(args.interval))
    doc = fit.to_dict()
    doc.update({"n_values": ns})
    rows = [doc]
    _emit(args, "fit-corrections", rows, _provenance(args))
    return 0


def _cmd_moments(args):
    from .corrections import moment_integral, variance_combination
    rows = []
    for which in args.which:
        v = moment_integral(which, args.method, n=args.n, tol=args.tol)
        rows.append({"which": which, "method": args.method, "n": args.n,
                     "value": v})
    if "mu0" in args.which and "t2_f2" in args.which:
        rows.append({"which": "variance_combination", "method": args.method,
                     "n": args.n,
                     "value": variance_combination(args.n, args.method, args.tol)})
    _emit(args, "moments", rows, _provenance(args))
    return 0


def _cmd_fit_mean_var(args):
    from .corrections import fit_two_windows
    from .series import exact_distribution_table
    from .tables import ExactDistributionTable
    if args.table:
        table = ExactDistributionTable.from_json(args.table)
    else:
        table = exact_distribution_table(args.N, threads=args.threads)
    w1 = (args.windows[0], args.windows[1])
    w2 = (args.windows[2], args.windows[3])
    rows = []
    for kind in ("mean", "variance"):
        f1, f2, digits = fit_two_windows(table, w1, w2, args.num_terms,
                                         kind=kind, dps=args.precision or DEFAULT.fit_dps)
        for k in range(args.num_terms):
            rows.append({"kind": kind, "k": k, "window1": f1.coefficients[k],
                         "window2": f2.coefficients[k],
                         "matching_digits": digits[k]})
    _emit(args, "fit-mean-var", rows, _provenance(args, windows=args.windows))
    return 0


def _cmd_regev(args):
    from .stirling import regev_count
    rows = []
    for corrected in (False, True):
        est = regev_count(args.n, args.l, gaussian_corrected=corrected)
        man, exp = est.mantissa_exponent()
        rows.append({"n": args.n, "l": args.l,
                     "variant": "gaussian-corrected" if corrected else "plain",
                     "mantissa": man, "exponent": exp,
                     "log10": est.log10})
    _emit(args, "regev", rows, _provenance(args))
    return 0


def _cmd_validate(args):
    from .validate import run_validation
    ok = run_validation(verbose=True)
    return 0 if ok else 1


# -- parser -------------------------------------------------------------------------

def _common_flags(parser, suppress: bool):
    d = argparse.SUPPRESS if suppress else None

    def default(v):
        return argparse.SUPPRESS if suppress else v

    parser.add_argument("--tol", type=float, default=default(None),
                        help="backend tolerance (default: adaptive)")
    parser.add_argument("--precision", type=int, default=default(None),
                        help="decimal digits for extended-precision paths")
    parser.add_argument("--format", choices=("csv", "json"),
                        default=default("csv"))
    parser.add_argument("--digits", type=int, default=default(None),
                        help="fixed significant digits in CSV "
                             "(default: shortest round-trip)")
    parser.add_argument("--out", default=default(None),
                        help="output file (default stdout)")
    parser.add_argument("--cache-dir", default=default(None),
                        help=f"coefficient cache directory (or ${CACHE_DIR_ENV})")
    parser.add_argument("--threads", type=int, default=default(1))
    parser.add_argument("--paper-scale", action="store_true",
                        default=default(False),
                        help="unlock n beyond desk-scale defaults")


def build_parser():
    p = argparse.ArgumentParser(
        prog="lisdist",
        description="Length distribution of longest increasing subsequences: "
                    "exact tables, saddle-point approximation, Tracy-Widom "
                    "corrections.")
    _common_flags(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _common_flags(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True,
                           parser_class=lambda **kw: argparse.ArgumentParser(
                               parents=[common], **kw))

    q = sub.add_parser("exact-table", help="exact rational table up to N")
    q.add_argument("N", type=int)
    q.set_defaults(func=_cmd_exact_table)

    q = sub.add_parser("cdf", help="saddle-point CDF over an l range")
    q.add_argument("n", type=int)
    q.add_argument("lrange", help="l or l1..l2")
    q.set_defaults(func=_cmd_cdf)

    q = sub.add_parser("pdf", help="saddle-point PDF over an l range")
    q.add_argument("n", type=int)
    q.add_argument("lrange", help="l or l1..l2")
    q.set_defaults(func=_cmd_pdf)

    q = sub.add_parser("montecarlo", help="seeded Monte Carlo distribution")
    q.add_argument("n", type=int)
    q.add_argument("trials", type=int)
    q.add_argument("seed", type=int)
    q.set_defaults(func=_cmd_montecarlo)

    q = sub.add_parser("f2", help="Tracy-Widom F2 and derivatives")
    q.add_argument("s", type=float)
    q.add_argument("--max-deriv", type=int, default=3)
    q.set_defaults(func=_cmd_f2)

    q = sub.add_parser("hard-edge", help="hard-edge (g, v, u) at (alpha, s)")
    q.add_argument("alpha", type=float)
    q.add_argument("s", type=float)
    q.add_argument("--backend", default="auto",
                   choices=("auto", "fredholm", "chazy_series",
                            "connection_asymptotic"))
    q.add_argument("--s-grid", nargs=3, type=float, metavar=("LO", "HI", "COUNT"),
                   default=None, help="dump a grid instead of one point")
    q.set_defaults(func=_cmd_hard_edge)

    q = sub.add_parser("residuals", help="rescaled residuals vs the soft-edge limit")
    q.add_argument("n", type=int)
    q.add_argument("order", type=int, choices=(0, 1, 2))
    q.add_argument("--source", choices=("stirling", "exact"), default="stirling")
    q.add_argument("--kind", choices=("cdf", "pdf"), default="cdf")
    q.set_defaults(func=_cmd_residuals)

    q = sub.add_parser("fit-corrections",
                       help="fit a polynomial correction to rescaled residuals")
    q.add_argument("--n", type=int, nargs="*", default=None)
    q.add_argument("--degree", type=int, default=64)
    q.add_argument("--interval", type=float, nargs=2, default=(-8.0, 10.0))
    q.set_defaults(func=_cmd_fit_corrections)

    q = sub.add_parser("moments", help="moment integrals of expansion terms")
    q.add_argument("--which", nargs="*",
                   default=("mu0", "t2_f2"),
                   choices=("mu0", "mu1", "t2_f2", "t2_f21", "t_f2ppp", "t2_f2ppp"))
    q.add_argument("--method", choices=("quadrature", "trapezoid"),
                   default="quadrature")
    q.add_argument("--n", type=int, default=None,
                   help="grid parameter for the trapezoid method")
    q.set_defaults(func=_cmd_moments)

    q = sub.add_parser("fit-mean-var",
                       help="fit mean/variance expansions to exact-table data")
    q.add_argument("--N", type=int, default=200, help="table size to build")
    q.add_argument("--table", default=None, help="existing table JSON")
    q.add_argument("--windows", type=int, nargs=4, default=(100, 200, 120, 200),
                   metavar=("A1", "B1", "A2", "B2"))
    q.add_argument("--num-terms", type=int, default=6)
    q.set_defaults(func=_cmd_fit_mean_var)

    q = sub.add_parser("regev", help="fixed-l closed-form count asymptotics")
    q.add_argument("n", type=int)
    q.add_argument("l", type=int)
    q.set_defaults(func=_cmd_regev)

    q = sub.add_parser("validate", help="run the cross-oracle validation suite")
    q.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cache_dir:
        from .series import set_cache_dir
        set_cache_dir(args.cache_dir)
    try:
        return args.func(args)
    except LisdistError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

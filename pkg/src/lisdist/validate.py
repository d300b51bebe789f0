"""Cross-oracle validation suite behind `lisdist validate`.

Fast subset of the package invariants: every check pits two independent
routes against each other at default tolerances. Exit status 0 means all
checks passed.
"""

from __future__ import annotations

import math
from fractions import Fraction


def _check(name, fn, report, verbose):
    try:
        fn()
        report.append((name, True, ""))
        if verbose:
            print(f"PASS  {name}")
        return True
    except Exception as exc:                      # noqa: BLE001 - report, not crash
        report.append((name, False, str(exc)))
        if verbose:
            print(f"FAIL  {name}: {exc}")
        return False


def run_validation(verbose: bool = False) -> bool:
    from . import corrections, kernels, oracle, series, stirling

    report = []
    ok = True

    def brute_vs_hook():
        for n in range(1, 9):
            b = oracle.brute_force_distribution(n)
            h = oracle.hook_length_distribution(n)
            assert b.row(n) == h.row(n), f"n={n}"

    def hook_vs_series():
        t = series.exact_distribution_table(20)
        h = oracle.hook_length_distribution(20)
        assert t.row(20) == h.row(20)

    def goulden_vs_hook():
        h = oracle.hook_length_distribution(12)
        for l in (6, 8, 11):
            assert oracle.goulden_pdf(12, l) == h.pdf(12, l), f"l={l}"

    def chazy_exact():
        cs = series.chazy_coefficients(3, 14)
        assert all(c == 0 for c in series.chazy_residual(cs))
        assert all(c == 0 for c in series.sigma_piii_residual(cs))
        assert cs.coefficient(4) == Fraction(1, 4 ** 4 * 6 * 24)

    def poissonization():
        for l, r in ((2, 3.0), (5, 18.23), (3, 8.0), (1, 1.0)):
            gs = series.generating_function_series(l, 60)
            f = math.fsum(float(c) * r ** k for k, c in enumerate(gs.taylor))
            lhs = f * math.exp(-r)
            ev = kernels.hard_edge_eval(float(l), 4.0 * r, backend="fredholm")
            assert abs(ev.g / lhs - 1) < 1e-8, f"l={l} r={r}: {ev.g} vs {lhs}"

    def log_derivative_identities():
        for alpha, s in ((1.0, 8.0), (2.5, 15.0), (5.0, 40.0)):
            h = s * 1e-3
            e0 = kernels.hard_edge_eval(alpha, s, backend="fredholm")
            ep = kernels.hard_edge_eval(alpha, s + h, backend="fredholm")
            em = kernels.hard_edge_eval(alpha, s - h, backend="fredholm")
            v_fd = -s * (ep.log_g - em.log_g) / (2 * h)
            u_fd = s * (ep.v - em.v) / (2 * h)
            assert abs(v_fd - e0.v) < 1e-6 * (1 + abs(e0.v))
            assert abs(u_fd - e0.u) < 1e-6 * (1 + abs(e0.u))

    def stirling_table1():
        t = series.exact_distribution_table(20)
        for l in range(1, 10):
            exact = float(t.cdf(20, l))
            approx = stirling.stirling_cdf(20, l).cdf
            assert abs(approx / exact - 1) < 0.01, f"l={l}"

    def tracy_widom_moments():
        m1 = corrections.trapezoid_moment(48, 1)
        m2 = corrections.trapezoid_moment(48, 2)
        assert abs(m1 + 1.7710868074) < 1e-9
        assert abs(m2 - m1 * m1 - 0.8131947928) < 1e-9

    def tau_consistency():
        exact = stirling.tau_n(100)
        import mpmath as mp
        with mp.workdps(40):
            series_val = mp.fsum(mp.mpf(c) * mp.mpf(100) ** -k
                                 for k, c in enumerate(stirling._TAU_COEFFS))
        assert abs(exact / float(series_val) - 1) < 1e-12

    def monte_carlo_reproducible():
        a = oracle.monte_carlo_cdf(10, 20000, seed=7, workers=2)
        b = oracle.monte_carlo_cdf(10, 20000, seed=7, workers=2)
        assert (a.counts == b.counts).all()

    checks = [
        ("brute force == hook length (n <= 8)", brute_vs_hook),
        ("hook length == series table (n = 20)", hook_vs_series),
        ("goulden == hook length (n = 12)", goulden_vs_hook),
        ("chazy / sigma-PIII residuals exactly zero", chazy_exact),
        ("poissonization identity e^-r f_l(r) = g_l(4r)", poissonization),
        ("v = -s dlog g/ds and u = s v' (finite differences)", log_derivative_identities),
        ("stirling vs exact at n=20 (< 1% relative)", stirling_table1),
        ("Tracy-Widom mean/variance moments", tracy_widom_moments),
        ("tau_n definition vs expansion at n=100", tau_consistency),
        ("Monte Carlo bit-reproducibility", monte_carlo_reproducible),
    ]
    for name, fn in checks:
        ok = _check(name, fn, report, verbose) and ok
    if verbose:
        n_pass = sum(1 for _, good, _ in report if good)
        print(f"{n_pass}/{len(report)} checks passed")
    return ok

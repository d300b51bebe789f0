"""Finite-size corrections to the soft-edge (Tracy-Widom) limit.

The CDF admits an expansion

    P(L_n <= l) = F2(t_l) + n^{-1/3} F21(t_l) + n^{-2/3} F22(t_l) + O(1/n),
    t_l = (l - 2 sqrt(n)) / n^{1/6},

and differencing gives a PDF expansion on the half-shifted grid
t_hat_l = (l - 1/2 - 2 sqrt(n)) / n^{1/6}. This module produces rescaled
residual data sets, fits polynomial approximations to the correction
functions in a Chebyshev basis, evaluates the induced moment integrals,
and fits mean/variance expansions to exact-table data in extended
precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from numpy.polynomial import chebyshev as _cheb

from .config import DEFAULT
from .errors import OutsideFitIntervalError
from .kernels import airy_f2, f21_conjectured, f21_conjectured_deriv
from .stirling import stirling_profile


def t_scaled(n: int, l) -> float:
    return (np.asarray(l, dtype=float) - 2.0 * math.sqrt(n)) / n ** (1.0 / 6.0)


def t_scaled_half(n: int, l) -> float:
    """PDF grid: shifted by 1/2 (central differencing of the CDF)."""
    return (np.asarray(l, dtype=float) - 0.5 - 2.0 * math.sqrt(n)) / n ** (1.0 / 6.0)


# -- rescaled residual data ------------------------------------------------------

@dataclass(frozen=True)
class ScaledResidualSet:
    n: int
    order: int
    kind: str               # "cdf" | "pdf"
    source: str             # "stirling" | "exact"
    scaling_exponent: float
    points: tuple           # ((t, value), ...)

    def ts(self):
        return np.array([p[0] for p in self.points])

    def values(self):
        return np.array([p[1] for p in self.points])


def _l_range_for(n: int, t_range) -> range:
    lo = int(math.ceil(t_range[0] * n ** (1.0 / 6.0) + 2.0 * math.sqrt(n)))
    hi = int(math.floor(t_range[1] * n ** (1.0 / 6.0) + 2.0 * math.sqrt(n)))
    return range(max(1, lo), min(n, hi) + 1)


def scaled_residuals(n: int, order: int, source: str = "stirling", *,
                     kind: str = "cdf", table=None, f21_fit=None,
                     f22_fit=None, t_range=(-8.0, 10.0),
                     tol: float | None = None) -> ScaledResidualSet:
    """Rescaled differences between the distribution and its truncated
    soft-edge expansion.

    order 0: n^{1/3} (CDF - F2)                 [PDF: n^{1/2} (... - F2'/n^{1/6})]
    order 1: n^{2/3} (CDF - F2 - F21/n^{1/3})   [PDF scaling n^{5/6}]
    order 2: n       (CDF - ... - F22/n^{2/3})

    The correction functions default to fitted approximations when given,
    else to the conjectured closed form for F21; order >= 2 requires an
    F22 fit.
    """
    if kind not in ("cdf", "pdf"):
        raise ValueError("kind must be 'cdf' or 'pdf'")
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if order >= 2 and f22_fit is None:
        raise ValueError("order-2 residuals need an F22 fit")
    ls = _l_range_for(n, t_range)
    if len(ls) == 0:
        return ScaledResidualSet(n=n, order=order, kind=kind, source=source,
                                 scaling_exponent=0.0, points=())
    probs = _distribution_values(n, ls, source, kind, table, tol)

    n6 = n ** (1.0 / 6.0)
    pts = []
    for l, p in zip(ls, probs):
        if kind == "cdf":
            t = (l - 2.0 * math.sqrt(n)) / n6
            model = airy_f2(t, tol, 0).F2
            if order >= 1:
                f21 = f21_fit(t) if f21_fit is not None else f21_conjectured(t, tol)
                model += n ** (-1.0 / 3.0) * f21
            if order >= 2:
                model += n ** (-2.0 / 3.0) * f22_fit(t)
            scale = n ** ((order + 1) / 3.0)
        else:
            t = (l - 0.5 - 2.0 * math.sqrt(n)) / n6
            ev = airy_f2(t, tol, 3)
            model = n ** (-1.0 / 6.0) * ev.derivs[0]
            if order >= 1:
                d_f21 = (f21_fit.derivative(1)(t) if f21_fit is not None
                         else f21_conjectured_deriv(t, 1, tol))
                model += n ** (-0.5) * (d_f21 + ev.derivs[2] / 24.0)
            if order >= 2:
                model += n ** (-5.0 / 6.0) * f22_fit.derivative(1)(t)
            scale = n ** (0.5 if order == 0 else 5.0 / 6.0 if order == 1 else 7.0 / 6.0)
        val = scale * (p - model)
        if math.isfinite(val):
            pts.append((float(t), float(val)))
    exponent = math.log(scale, n) if len(pts) else 0.0
    return ScaledResidualSet(n=n, order=order, kind=kind, source=source,
                             scaling_exponent=exponent, points=tuple(pts))


def _distribution_values(n, ls, source, kind, table, tol):
    if source == "exact":
        if table is None:
            raise ValueError("source='exact' needs a table")
        if kind == "cdf":
            return [float(table.cdf(n, l)) for l in ls]
        return [float(table.pdf(n, l)) for l in ls]
    if source != "stirling":
        raise ValueError("source must be 'exact' or 'stirling'")
    _, cdfv, pdfv, _ = stirling_profile(n, ls[0], ls[-1], tol)
    return cdfv if kind == "cdf" else pdfv


# -- polynomial fits ---------------------------------------------------------------

@dataclass(frozen=True)
class CorrectionFit:
    """Least-squares polynomial in the Chebyshev basis of the fit interval."""

    cheb: _cheb.Chebyshev = field(repr=False)
    degree: int
    interval: tuple
    rms_residual: float
    max_residual: float
    npoints: int

    def __call__(self, t, strict: bool = True):
        t_arr = np.asarray(t, dtype=float)
        lo, hi = self.interval
        if strict and (np.any(t_arr < lo - 1e-12) or np.any(t_arr > hi + 1e-12)):
            raise OutsideFitIntervalError(
                f"evaluation at {t} outside fit interval [{lo}, {hi}]")
        out = self.cheb(t_arr)
        return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    def derivative(self, order: int = 1) -> "CorrectionFit":
        return CorrectionFit(cheb=self.cheb.deriv(order),
                             degree=max(self.degree - order, 0),
                             interval=self.interval,
                             rms_residual=math.nan, max_residual=math.nan,
                             npoints=self.npoints)

    def to_dict(self) -> dict:
        return {
            "basis": "chebyshev",
            "interval": list(self.interval),
            "degree": self.degree,
            "coefficients": [float(c) for c in self.cheb.coef],
            "rms_residual": self.rms_residual,
            "max_residual": self.max_residual,
            "npoints": self.npoints,
        }


def fit_correction(points, degree: int, interval=None) -> CorrectionFit:
    """Fit a degree-`degree` polynomial to (t, value) points, restricted to
    `interval` when given. Chebyshev basis on the interval keeps high
    degrees well conditioned; monomials would be numerically singular."""
    pts = [(float(t), float(v)) for t, v in points]
    if interval is not None:
        lo, hi = interval
        pts = [(t, v) for t, v in pts if lo <= t <= hi]
    else:
        lo = min(t for t, _ in pts)
        hi = max(t for t, _ in pts)
    if degree + 1 > len(pts):
        raise ValueError(
            f"degree {degree} needs at least {degree + 1} points, have {len(pts)}")
    ts = np.array([t for t, _ in pts])
    vs = np.array([v for _, v in pts])
    ch = _cheb.Chebyshev.fit(ts, vs, degree, domain=[lo, hi])
    resid = vs - ch(ts)
    return CorrectionFit(cheb=ch, degree=degree, interval=(lo, hi),
                         rms_residual=float(np.sqrt(np.mean(resid ** 2))),
                         max_residual=float(np.max(np.abs(resid))),
                         npoints=len(pts))


# -- PDF expansion -------------------------------------------------------------------

@dataclass(frozen=True)
class PdfExpansion:
    n: int
    l: int
    t_hat: float
    terms: tuple
    value: float
    methods: tuple


def pdf_expansion(n: int, l: int, num_terms: int = 2, *, f21_fit=None,
                  f22_fit=None, tol: float | None = None) -> PdfExpansion:
    """Truncated PDF expansion at the half-shifted scaling point.

    Terms: n^{-1/6} F2', n^{-1/2} (F21' + F2'''/24),
    n^{-5/6} (F22' + F21'''/24 + F2^(5)/1920). F21 defaults to the
    conjectured closed form; the third term requires an F22 fit.
    """
    if not 1 <= num_terms <= 3:
        raise ValueError("num_terms must be 1, 2 or 3")
    th = float(t_scaled_half(n, l))
    ev = airy_f2(th, tol, max_deriv=5 if num_terms >= 3 else 3)
    terms = [n ** (-1.0 / 6.0) * ev.derivs[0]]
    methods = ["f2:resolvent"]
    if num_terms >= 2:
        d1 = (f21_fit.derivative(1)(th) if f21_fit is not None
              else f21_conjectured_deriv(th, 1, tol))
        terms.append(n ** (-0.5) * (d1 + ev.derivs[2] / 24.0))
        methods.append("f21:" + ("fit" if f21_fit is not None else "conjectured"))
    if num_terms >= 3:
        if f22_fit is None:
            raise ValueError("third expansion term needs an F22 fit")
        d3 = (f21_fit.derivative(3)(th) if f21_fit is not None
              else f21_conjectured_deriv(th, 3, tol))
        terms.append(n ** (-5.0 / 6.0) * (f22_fit.derivative(1)(th)
                                          + d3 / 24.0 + ev.derivs[4] / 1920.0))
        methods.append("f22:fit, f2^(5):chebyshev-spectral")
    return PdfExpansion(n=n, l=l, t_hat=th, terms=tuple(terms),
                        value=float(sum(terms)), methods=tuple(methods))


# -- moment integrals ----------------------------------------------------------------

_QUAD_RANGE = (-10.0, 12.0)

_INTEGRANDS = {
    "mu0": (1, "f2p"),
    "mu1": (1, "f21p"),
    "mu2": (1, "f22p"),
    "t2_f2": (2, "f2p"),
    "t2_f21": (2, "f21p"),
    "t2_f22": (2, "f22p"),
    "t_f2ppp": (1, "f2ppp"),
    "t2_f2ppp": (2, "f2ppp"),
}


def _fit_deriv_or_zero(fit: CorrectionFit, t: float, order: int = 1) -> float:
    lo, hi = fit.interval
    if t < lo or t > hi:
        return 0.0          # corrections decay to zero; never extrapolate
    return fit.derivative(order)(t)


def _g_eval(name, t, tol, f21_fit, f22_fit):
    if t < -12.5 and name in ("f2p", "f2ppp"):
        return 0.0          # below ~1e-60, and the determinant grid degrades
    if name == "f2p":
        return airy_f2(t, tol, 1).derivs[0]
    if name == "f21p":
        if f21_fit is not None:
            return _fit_deriv_or_zero(f21_fit, t, 1)
        return f21_conjectured_deriv(t, 1, tol)
    if name == "f22p":
        if f22_fit is None:
            raise ValueError("mu2/t2_f22 need an F22 fit")
        return _fit_deriv_or_zero(f22_fit, t, 1)
    if name == "f2ppp":
        return airy_f2(t, tol, 3).derivs[2]
    raise ValueError(name)


def moment_integral(which: str, method: str = "quadrature", *, n: int | None = None,
                    f21_fit=None, f22_fit=None, tol: float | None = None,
                    quad_points: int = 200) -> float:
    """Moment integrals of the expansion term functions.

    method "quadrature": Gauss-Legendre over the effective support (the
    integrands decay super-exponentially outside [-10, 12]);
    method "trapezoid": the discrete sum over the half-shifted grid of a
    given n, which is the trapezoidal rule with step n^{-1/6} and
    converges exponentially fast in the step count.
    """
    if which not in _INTEGRANDS:
        raise ValueError(f"unknown moment {which!r}; one of {sorted(_INTEGRANDS)}")
    k, g = _INTEGRANDS[which]
    if method == "trapezoid":
        if n is None:
            raise ValueError("trapezoid method needs n")
        return trapezoid_moment(n, k, g, f21_fit=f21_fit, f22_fit=f22_fit, tol=tol)
    if method != "quadrature":
        raise ValueError("method must be 'quadrature' or 'trapezoid'")
    from .kernels import gauss_legendre_01
    rule = gauss_legendre_01(quad_points)
    lo, hi = _QUAD_RANGE
    if which in ("mu2", "t2_f22"):
        if f22_fit is None:
            raise ValueError(f"{which} needs an F22 fit")
        lo, hi = f22_fit.interval
    ts = lo + (hi - lo) * rule.nodes
    ws = (hi - lo) * rule.weights
    total = 0.0
    for t, w in zip(ts, ws):
        total += w * t ** k * _g_eval(g, float(t), tol, f21_fit, f22_fit)
    return total


def trapezoid_moment(n: int, k: int, g: str = "f2p", *, f21_fit=None,
                     f22_fit=None, tol: float | None = None) -> float:
    """n^{-1/6} sum_{l=1}^{n} t_hat_l^k G(t_hat_l) on the half-shifted grid."""
    total = 0.0
    for l in range(1, n + 1):
        t = float(t_scaled_half(n, l))
        if t > _QUAD_RANGE[1] + 8.0:
            break
        total += t ** k * _g_eval(g, t, tol, f21_fit, f22_fit)
    return total / n ** (1.0 / 6.0)


def variance_combination(n: int | None = None, method: str = "quadrature",
                         tol: float | None = None) -> float:
    """Second-moment combination integral(t^2 F2') - integral(t F2')^2,
    the Tracy-Widom variance when converged."""
    m1 = moment_integral("mu0", method, n=n, tol=tol)
    m2 = moment_integral("t2_f2", method, n=n, tol=tol)
    return m2 - m1 * m1


# -- mean / variance expansion fits ---------------------------------------------------

@dataclass(frozen=True)
class ExpansionFit:
    kind: str
    window: tuple
    num_terms: int
    coefficients: tuple
    rms_residual: float

    def predict(self, n: float) -> float:
        x = 0.0
        for k, c in enumerate(self.coefficients):
            x += c * n ** _exponent(self.kind, k)
        if self.kind == "mean":
            x += 2.0 * math.sqrt(n) + 0.5
        return x


def _exponent(kind: str, k: int) -> float:
    return (1.0 - 2.0 * k) / 6.0 if kind == "mean" else (1.0 - k) / 3.0


def fit_mean_variance(table, n_min: int, n_max: int, num_terms: int, *,
                      kind: str = "mean", dps: int = DEFAULT.fit_dps
                      ) -> ExpansionFit:
    """Least-squares fit of the asymptotic expansion of E(L_n) or Var(L_n)
    to exact-table data, in extended precision.

    mean:      E(L_n) - 2 sqrt(n) - 1/2 = sum_k c_k n^{(1-2k)/6}
    variance:  Var(L_n)                 = sum_k c_k n^{(1-k)/3}

    The design matrix is column-normalized and solved by QR at `dps`
    digits; high-degree fits on short windows are otherwise numerically
    singular.
    """
    if kind not in ("mean", "variance"):
        raise ValueError("kind must be 'mean' or 'variance'")
    ns = list(range(n_min, n_max + 1))
    if num_terms > len(ns):
        raise ValueError("more terms than data points")
    with mp.workdps(dps):
        ys = []
        for n in ns:
            if kind == "mean":
                mn = table.mean(n)
                exact = mp.mpf(mn.numerator) / mn.denominator
                ys.append(exact - 2 * mp.sqrt(n) - mp.mpf(1) / 2)
            else:
                var = table.variance(n)
                ys.append(mp.mpf(var.numerator) / var.denominator)
        A = mp.matrix(len(ns), num_terms)
        scales = []
        for k in range(num_terms):
            e = mp.mpf(_exponent(kind, k))
            col = [mp.mpf(n) ** e for n in ns]
            s = mp.sqrt(mp.fsum(c * c for c in col))
            scales.append(s)
            for i, c in enumerate(col):
                A[i, k] = c / s
        b = mp.matrix(ys)
        coef, _ = mp.qr_solve(A, b)
        coefs = [float(coef[k] / scales[k]) for k in range(num_terms)]
        resid = []
        for i, n in enumerate(ns):
            pred = mp.fsum(coef[k] / scales[k] * mp.mpf(n) ** mp.mpf(_exponent(kind, k))
                           for k in range(num_terms))
            resid.append(float(ys[i] - pred))
    rms = math.sqrt(sum(r * r for r in resid) / len(resid))
    return ExpansionFit(kind=kind, window=(n_min, n_max), num_terms=num_terms,
                        coefficients=tuple(coefs), rms_residual=rms)


def matching_digits(x: float, y: float) -> int:
    """Number of agreeing significant digits between two fit coefficients."""
    if x == y:
        return 15
    denom = max(abs(x), abs(y))
    if denom == 0.0:
        return 0
    rel = abs(x - y) / denom
    if rel >= 1.0:
        return 0
    return int(math.floor(-math.log10(rel)))


def fit_two_windows(table, window1, window2, num_terms: int, *,
                    kind: str = "mean", dps: int = DEFAULT.fit_dps):
    """Stability protocol: fit on two windows, report per-coefficient
    agreement in matching significant digits."""
    f1 = fit_mean_variance(table, *window1, num_terms, kind=kind, dps=dps)
    f2 = fit_mean_variance(table, *window2, num_terms, kind=kind, dps=dps)
    digits = [matching_digits(a, b)
              for a, b in zip(f1.coefficients, f2.coefficients)]
    return f1, f2, digits


# -- error scaling (soft-edge limit vs saddle point) ----------------------------------

def max_abs_errors(n: int, table, tol: float | None = None) -> dict:
    """max_l |approx - exact| over l = 1..n for the saddle-point formula
    and for the bare soft-edge limit F2(t_l)."""
    _, cdfv, _, _ = stirling_profile(n, 1, n, tol)
    err_stirling = 0.0
    err_limit = 0.0
    for l in range(1, n + 1):
        exact = float(table.cdf(n, l))
        err_stirling = max(err_stirling, abs(cdfv[l - 1] - exact))
        f2 = airy_f2(float(t_scaled(n, l)), tol, 0).F2
        err_limit = max(err_limit, abs(f2 - exact))
    return {"stirling": err_stirling, "limit": err_limit}


def fit_power_law(ns, errs) -> tuple:
    """Fit err ~ c n^{-alpha} by log-log least squares; returns (c, alpha)."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(errs, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    return float(np.exp(intercept)), float(-slope)

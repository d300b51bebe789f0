"""Floating-point evaluation of the hard-edge quantities (g, v, u) and of
the Tracy-Widom distribution F2 with derivatives.

Both families are Fredholm determinants of trace-class integral operators
(Bessel kernel on (0, s), Airy kernel on (s, inf)). They are discretized
by Nystrom's method with Gauss-Legendre rules under smooth changes of
variables, where determinants, resolvents and inner products of the
discretized operator converge exponentially in the node count for these
analytic kernels. Node counts are doubled until two successive values
agree to tolerance; the last difference is reported as the error estimate.

Backends for the hard edge:
  fredholm               Nystrom determinant (with an automatic
                         turning-point window for very large order);
  chazy_series           local power series of v, valid below its finite
                         convergence radius (~ 5.5 * l empirically);
  connection_asymptotic  large-s expansion with the superfactorial
                         constant fixing log g.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.special import airy as _airy
from scipy.special import jv as _jv

from .config import DEFAULT
from .errors import ConvergenceError, PrecisionError

_QUAD = DEFAULT.quad
_LOG_2PI = math.log(2.0 * math.pi)


# -- quadrature rules ---------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights on [0, 1]; exact for polynomials of degree < 2m."""

    nodes: np.ndarray
    weights: np.ndarray
    description: str


_rule_cache: dict = {}
_rule_lock = threading.Lock()


def gauss_legendre_01(m: int) -> QuadratureRule:
    with _rule_lock:
        rule = _rule_cache.get(m)
        if rule is None:
            x, w = np.polynomial.legendre.leggauss(m)
            rule = QuadratureRule(nodes=(x + 1.0) / 2.0, weights=w / 2.0,
                                  description=f"Gauss-Legendre m={m} on [0,1]")
            _rule_cache[m] = rule
    return rule


# -- Bessel kernel ------------------------------------------------------------

@dataclass(frozen=True)
class DiscretizedOperator:
    """Symmetrized Nystrom discretization W^{1/2} K W^{1/2}."""

    matrix: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray


def _bessel_window(alpha: float, s: float) -> float:
    """Lower endpoint (in z = sqrt(x)) below which the order-alpha Bessel
    kernel is negligible; 0 means integrate the whole interval.

    Below the turning point z = alpha the Bessel function decays like
    exp(-c alpha (1 - z/alpha)^{3/2}); a window of width
    `window_width * alpha^{-2/3}` keeps the discarded mass below ~1e-30.
    """
    zs = math.sqrt(s)
    if alpha < _QUAD.window_alpha_min:
        return 0.0
    w = _QUAD.window_width * alpha ** (-2.0 / 3.0)
    if w >= 0.5:
        return 0.0
    zlo = alpha * (1.0 - w)
    if zlo <= 0.3 * zs:
        return 0.0
    return min(zlo, 0.995 * zs)


def bessel_kernel_matrix(alpha: float, s: float, m: int, *,
                         z_lower: float | None = None) -> DiscretizedOperator:
    """Discretized Bessel kernel on (0, s), quadrature in z = sqrt(x).

    The z-substitution is the hard-edge map x = s xi^2 when z_lower = 0.
    The diagonal uses the analytic limit of the kernel.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    if m < 4:
        raise ValueError("need at least 4 nodes")
    zs = math.sqrt(s)
    zlo = _bessel_window(alpha, s) if z_lower is None else z_lower
    rule = gauss_legendre_01(m)
    z = zlo + (zs - zlo) * rule.nodes
    ww = rule.weights * (zs - zlo) * 2.0 * z          # dx = 2 z dz
    x = z * z
    ja = _jv(alpha, z)
    jam1 = _jv(alpha - 1.0, z)
    jap1 = _jv(alpha + 1.0, z)
    if not (np.isfinite(ja).all() and np.isfinite(jam1).all()
            and np.isfinite(jap1).all()):
        raise PrecisionError(f"Bessel evaluation overflow at alpha={alpha}, s={s}")
    phi = 0.5 * ja
    psi = 0.5 * z * jam1
    X = x[:, None]
    Y = x[None, :]
    num = 2.0 * (np.outer(phi, psi) - np.outer(psi, phi))
    with np.errstate(divide="ignore", invalid="ignore"):
        K = num / (X - Y)
    np.fill_diagonal(K, 0.25 * (ja * ja - jap1 * jam1))
    sw = np.sqrt(ww)
    return DiscretizedOperator(matrix=K * np.outer(sw, sw), nodes=x, weights=ww)


def _lu_logdet(I_A):
    lu, piv = lu_factor(I_A, check_finite=False)
    diag = np.diag(lu)
    if np.any(diag == 0.0):
        return (lu, piv), -np.inf, 0.0
    neg = int(np.sum(diag < 0)) + int(np.sum(piv != np.arange(len(piv))))
    sign = -1.0 if neg % 2 else 1.0
    return (lu, piv), float(np.sum(np.log(np.abs(diag)))), sign


def _hard_edge_fredholm_once(alpha: float, s: float, m: int):
    op = bessel_kernel_matrix(alpha, s, m)
    mm = op.matrix.shape[0]
    I_A = np.eye(mm) - op.matrix
    lu_piv, logdet, sign = _lu_logdet(I_A)
    if sign <= 0:
        return None
    z = np.sqrt(op.nodes)
    sw = np.sqrt(op.weights)
    phi_t = 0.5 * _jv(alpha, z) * sw
    psi_t = 0.5 * z * _jv(alpha - 1.0, z) * sw
    rp = lu_solve(lu_piv, phi_t, check_finite=False)
    v = float(rp @ phi_t)
    u = float((1.0 - alpha) * v + rp @ psi_t + v * v)
    return logdet, v, u


@dataclass(frozen=True)
class HardEdgeEval:
    """Hard-edge gap probability g(s) with auxiliaries
    v = -s (log g)' and u = s v'."""

    alpha: float
    s: float
    g: float
    log_g: float
    v: float
    u: float
    err_estimate: float
    backend: str


def _scaled_delta(prev, cur):
    """Max componentwise difference, relative for O(1)-or-larger values."""
    return max(abs(a - b) / (1.0 + abs(a)) for a, b in zip(cur, prev))


def _refine_nodes(eval_fn, tol, m_start, max_doublings, what):
    """Double the node count until two successive evaluations agree to tol.

    Refinement can hit a rounding-noise floor before tol (the discretized
    eigenvalue deficits approach machine epsilon); in that case the best
    agreeing pair is returned, provided it is still better than 1e-6, and
    its delta is reported as the error estimate.
    """
    m = max(m_start, 16)
    prev = None
    prev_err = math.inf
    best_err, best_val = math.inf, None
    for _ in range(max_doublings + 1):
        cur = eval_fn(m)
        if cur is not None:
            if prev is not None:
                err = _scaled_delta(prev, cur)
                if err <= tol and m >= 64:
                    return cur, err
                if err < best_err:
                    best_err, best_val = err, cur
                if m >= 256 and err > 10.0 * best_err:
                    break               # refinement is amplifying noise
                if m >= 256 and err > 0.25 * prev_err:
                    break               # far below the spectral rate: rounding floor
                prev_err = err
            prev = cur
        if 2 * m > _QUAD.max_nodes:
            break
        m *= 2
    if best_val is not None and best_err <= max(1e-6, 100.0 * tol):
        return best_val, best_err
    if prev is None:
        raise ConvergenceError(f"{what}: determinant lost positivity")
    raise ConvergenceError(
        f"{what}: node refinement did not reach tol={tol:.1e} "
        f"(best agreement {best_err:.2e})", detail={"err": best_err})


def _hard_edge_fredholm(alpha, s, tol, m_start, max_doublings):
    # crude oscillation count of J_alpha(z) beyond its turning point
    osc = max(0.0, math.sqrt(s) - max(_bessel_window(alpha, s), alpha)) / math.pi
    if 3.0 * osc > _QUAD.max_nodes:
        raise ConvergenceError(
            f"Bessel kernel too oscillatory for the Nystrom grid "
            f"(alpha={alpha}, s={s:.3g}); use the asymptotic backend",
            detail={"oscillations": osc})
    return _refine_nodes(lambda m: _hard_edge_fredholm_once(alpha, s, m),
                         tol, m_start, max_doublings,
                         f"hard edge alpha={alpha}, s={s:.3g}")


# -- local series backend ------------------------------------------------------

_series_term_cache: dict = {}
_series_lock = threading.Lock()


def _series_term_logs(l: int, K: int):
    """log |a_k| + k log 4 offsets etc., cached per l: returns
    (signs, logmag) arrays where a_k (s/4)^k = sign * exp(logmag + k log(s/4))."""
    with _series_lock:
        entry = _series_term_cache.get(l)
        if entry is None or entry[0] < K:
            from .series import chazy_scaled
            A = chazy_scaled(l, K)
            signs = np.zeros(K + 1)
            logmag = np.full(K + 1, -np.inf)
            for k in range(l + 1, K + 1):
                a = int(A[k])
                if a == 0:
                    continue
                signs[k] = 1.0 if a > 0 else -1.0
                logmag[k] = (float(math.log(abs(a))) if abs(a) < 10 ** 300
                             else _log_bigint(abs(a)))
                logmag[k] -= k * math.log(4.0) + 2.0 * math.lgamma(k + 1)
            entry = (K, signs, logmag)
            _series_term_cache[l] = entry
    return entry[1][:K + 1], entry[2][:K + 1]


def _log_bigint(v: int) -> float:
    b = v.bit_length()
    if b <= 900:
        return math.log(v)
    shift = b - 900
    return math.log(v >> shift) + shift * math.log(2.0)


def chazy_series_eval(l: int, s: float, tol: float, *, max_terms: int = 420
                      ) -> HardEdgeEval:
    """Evaluate (g, v, u) at small s by summing the local power series.

    Valid only inside the series' finite radius of convergence; raises
    ConvergenceError when the terms fail to decay geometrically.
    """
    if l != int(l) or l < 1:
        raise ValueError("series backend requires integer l >= 1")
    l = int(l)
    if s < 0:
        raise ValueError("s must be >= 0")
    if s == 0:
        return HardEdgeEval(alpha=float(l), s=0.0, g=1.0, log_g=0.0, v=0.0,
                            u=0.0, err_estimate=0.0, backend="chazy_series")
    K = min(max_terms, max(4 * l + 60, 100))
    logs_s = math.log(s)      # logmag already carries log|a_k| = log|A_k| - k log 4 - 2 log k!
    while True:
        signs, logmag = _series_term_logs(l, K)
        k_arr = np.arange(K + 1, dtype=float)
        with np.errstate(over="ignore"):
            terms = signs * np.exp(logmag + k_arr * logs_s)
        if not np.isfinite(terms).all():
            raise ConvergenceError(f"series terms overflow at l={l}, s={s:.3g}")
        tail = np.abs(terms[-6:])
        q = float(np.max(tail[1:] / np.maximum(tail[:-1], 1e-320)))
        v = float(terms.sum())
        decayed = q < 0.75 and tail[-1] <= tol * max(abs(v), 1e-30)
        if decayed:
            break
        if K >= max_terms:
            raise ConvergenceError(
                f"s={s:.3g} appears outside the series radius for l={l} "
                f"(tail ratio {q:.2f})", detail={"tail_ratio": q})
        K = min(max_terms, int(K * 1.5))
    u = float((k_arr * terms).sum())
    log_g = -float((terms[1:] / k_arr[1:]).sum())
    err = float(tail[-1] * q / (1.0 - min(q, 0.74)))
    return HardEdgeEval(alpha=float(l), s=float(s), g=math.exp(log_g),
                        log_g=log_g, v=v, u=u, err_estimate=err,
                        backend="chazy_series")


_radius_cache: dict = {}


def series_radius(l: int) -> float:
    """Cached empirical radius of convergence of the v_l series."""
    r = _radius_cache.get(l)
    if r is None:
        from .series import series_radius_estimate
        r = series_radius_estimate(l)
        _radius_cache[l] = r
    return r


# -- connection (large s) backend ----------------------------------------------

def _log_barnes_g(alpha: float) -> float:
    """log G(1 + alpha); superfactorial product for integer alpha."""
    if alpha == int(alpha) and alpha >= 0:
        from .series import superfactorial
        return _log_bigint(superfactorial(int(alpha))) if alpha > 20 else \
            math.log(superfactorial(int(alpha)))
    import mpmath as mp
    return float(mp.log(mp.barnesg(1 + alpha)))


def connection_asymptotic(alpha: float, s: float) -> HardEdgeEval:
    """Large-s expansion of (g, v, u), error O(s^{-3/2}).

    v(s)     = s/4 - (a/2) s^{1/2} + a^2/4 + (a/16) s^{-1/2} + (a^2/16) s^{-1}
    u(s)     = s v'(s), termwise;
    log g(s) = -s/4 + a s^{1/2} - (a^2/4) log s + C_a
               + (a/8) s^{-1/2} + (a^2/16) s^{-1},
    with C_a = log G(1+a) - (a/2) log(2 pi) fixing the integration constant
    (the superfactorial constant of the Toeplitz/hard-edge asymptotics).
    """
    if s <= 0:
        raise ValueError("s must be positive")
    a = float(alpha)
    sq = math.sqrt(s)
    v = s / 4.0 - a / 2.0 * sq + a * a / 4.0 + a / 16.0 / sq + a * a / 16.0 / s
    u = s / 4.0 - a / 4.0 * sq - a / 32.0 / sq - a * a / 16.0 / s
    log_g = (_log_barnes_g(a) - a / 2.0 * _LOG_2PI
             - s / 4.0 + a * sq - a * a / 4.0 * math.log(s)
             + a / 8.0 / sq + a * a / 16.0 / s)
    err = (1.0 + abs(a) ** 3) * s ** -1.5
    g = math.exp(log_g) if log_g > -700 else 0.0
    return HardEdgeEval(alpha=a, s=float(s), g=g, log_g=log_g, v=v, u=u,
                        err_estimate=err, backend="connection_asymptotic")


# -- router ---------------------------------------------------------------------

@lru_cache(maxsize=200_000)
def hard_edge_eval(alpha: float, s: float, tol: float | None = None,
                   backend: str = "auto", m_start: int = _QUAD.m_start,
                   max_doublings: int = _QUAD.max_doublings) -> HardEdgeEval:
    """Evaluate the hard-edge triple (g, v, u) at (alpha, s).

    backend "auto" prefers the exact-series backend inside its radius,
    the Nystrom determinant wherever its grid is affordable, and the
    connection expansion for asymptotically large s (with its error
    estimate reported rather than hidden).
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    if alpha <= -1:
        raise ValueError("alpha must exceed -1")
    if tol is None:
        tol = DEFAULT.tol.kernel_tol
    if s == 0:
        return HardEdgeEval(alpha=alpha, s=0.0, g=1.0, log_g=0.0, v=0.0, u=0.0,
                            err_estimate=0.0, backend="exact-endpoint")

    if backend == "chazy_series":
        return chazy_series_eval(int(alpha), s, tol)
    if backend == "connection_asymptotic":
        return connection_asymptotic(alpha, s)
    if backend == "fredholm":
        (log_g, v, u), err = _hard_edge_fredholm(alpha, s, tol, m_start,
                                                 max_doublings)
        g = math.exp(log_g) if log_g > -700 else 0.0
        return HardEdgeEval(alpha=alpha, s=s, g=g, log_g=log_g, v=v, u=u,
                            err_estimate=err, backend="fredholm")
    if backend != "auto":
        raise ValueError(f"unknown backend {backend!r}")

    if alpha == int(alpha) and 1 <= alpha <= 60 and s <= 0.7 * series_radius(int(alpha)):
        try:
            return chazy_series_eval(int(alpha), s, tol)
        except ConvergenceError:
            pass
    # soft-edge tail model of log g, valid across regimes: below ~e^{-250}
    # the determinant leaves double-precision range and only the asymptotic
    # expansion (or an exact-series route upstream) can represent the value
    r = s / 4.0
    t_star = (alpha - 2.0 * math.sqrt(r)) / max(r, 1e-12) ** (1.0 / 6.0)
    log_g_est = min(0.0, t_star ** 3 / 12.0) if t_star < 0 else 0.0
    if log_g_est < -250.0:
        conn = connection_asymptotic(alpha, s)
        if conn.err_estimate < 1e-6:
            return conn
        raise ConvergenceError(
            f"g(alpha={alpha}, s={s:.3g}) ~ e^{log_g_est:.0f} is below "
            "double-precision Fredholm range and the asymptotic expansion "
            "is not yet accurate; use the exact-series route")
    try:
        return hard_edge_eval(alpha, s, tol, "fredholm", m_start, max_doublings)
    except ConvergenceError:
        conn = connection_asymptotic(alpha, s)
        if conn.err_estimate < 1e-6:
            return conn
        raise


# -- Airy kernel / Tracy-Widom -------------------------------------------------

@dataclass(frozen=True)
class TracyWidomEval:
    """F2(s) and derivatives; derivs[k] is the (k+1)-st derivative."""

    s: float
    F2: float
    derivs: tuple
    err_estimate: float
    deriv_method: str


def _airy_nodes(s: float, m: int):
    """Exponential-type map of [0,1] onto (s, T): nodes cluster toward s,
    the cutoff T is where the Airy kernel is negligible (< 1e-18)."""
    T = max(s + 2.0, _QUAD.airy_cutoff)
    g = _QUAD.airy_map_rate
    rule = gauss_legendre_01(m)
    e = np.expm1(g * rule.nodes) / math.expm1(g)
    x = s + (T - s) * e
    dx = (T - s) * g * np.exp(g * rule.nodes) / math.expm1(g)
    return x, rule.weights * dx


def _airy_once(s: float, m: int, max_deriv: int):
    x, ww = _airy_nodes(s, m)
    ai, aip, _, _ = _airy(x)
    num = np.outer(ai, aip) - np.outer(aip, ai)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = num / (x[:, None] - x[None, :])
    np.fill_diagonal(K, aip * aip - x * ai * ai)
    sw = np.sqrt(ww)
    A = K * np.outer(sw, sw)
    I_A = np.eye(m) - A
    lu_piv, logdet, sign = _lu_logdet(I_A)
    if sign <= 0:
        return None
    F2 = math.exp(logdet) if logdet > -700 else 0.0
    out = [F2]
    if max_deriv >= 1:
        ai_t = ai * sw
        r_ai = lu_solve(lu_piv, ai_t, check_finite=False)
        out.append(F2 * float(r_ai @ ai_t))                       # F2'
    if max_deriv >= 2:
        aip_t = aip * sw
        out.append(2.0 * F2 * float(r_ai @ aip_t))                # F2''
    if max_deriv >= 3:
        aipp_t = (x * ai) * sw
        r_aip = lu_solve(lu_piv, aip_t, check_finite=False)
        out.append(2.0 * F2 * (float(r_aip @ aip_t) + float(r_ai @ aipp_t)))
    return out


@lru_cache(maxsize=400_000)
def airy_f2(s: float, tol: float | None = None, max_deriv: int = 3,
            m_start: int = _QUAD.m_start,
            max_doublings: int = _QUAD.max_doublings) -> TracyWidomEval:
    """Tracy-Widom F2 and derivatives via the Airy-kernel determinant.

    Derivatives up to order three come from resolvent inner products;
    orders four and five (when requested) from spectral differentiation of
    the resolvent-computed second derivative, with the method recorded.
    """
    if tol is None:
        tol = DEFAULT.tol.kernel_tol
    if max_deriv > 5:
        raise ValueError("derivatives up to order 5 are supported")
    res_deriv = min(max_deriv, 3)
    cur, err = _refine_nodes(lambda m: _airy_once(s, m, res_deriv),
                             tol, m_start, max_doublings, f"F2 at s={s}")
    derivs = list(cur[1:])
    method = "resolvent"
    if max_deriv >= 4:
        derivs.append(_f2_high_deriv(s, 4))
        method = "resolvent<=3, chebyshev-spectral>=4"
    if max_deriv >= 5:
        derivs.append(_f2_high_deriv(s, 5))
    return TracyWidomEval(s=float(s), F2=cur[0], derivs=tuple(derivs),
                          err_estimate=err, deriv_method=method)


def f2_cdf(s: float, tol: float | None = None) -> float:
    return airy_f2(s, tol, max_deriv=0).F2


# higher derivatives: Chebyshev interpolant of F2'' on a fixed bracket,
# differentiated spectrally. Estimated absolute accuracy ~1e-9 (order 4)
# and ~1e-7 (order 5); both enter only n^{-5/6}-scale correction terms.
_CHEB_DOMAIN = (-12.5, 13.5)
_cheb_lock = threading.Lock()
_cheb_series: dict = {}


def _f2pp_chebyshev():
    with _cheb_lock:
        ser = _cheb_series.get("f2pp")
        if ser is None:
            from numpy.polynomial import chebyshev as C
            a, b = _CHEB_DOMAIN

            def f(u):
                out = np.empty_like(u)
                for i, ui in enumerate(np.atleast_1d(u)):
                    x = 0.5 * (b - a) * (ui + 1.0) + a
                    out[i] = airy_f2(float(x), 1e-13, 2).derivs[1]
                return out

            coef = C.chebinterpolate(f, 140)
            ser = C.Chebyshev(coef, domain=[-1, 1])
            _cheb_series["f2pp"] = ser
    return ser


def _f2_high_deriv(s: float, order: int) -> float:
    a, b = _CHEB_DOMAIN
    if not a <= s <= b:
        return 0.0          # negligible outside the bracket
    ser = _f2pp_chebyshev().deriv(order - 2)
    u = 2.0 * (s - a) / (b - a) - 1.0
    return float(ser(u)) * (2.0 / (b - a)) ** (order - 2)


# -- first finite-size correction ----------------------------------------------

def f21_conjectured(t: float, tol: float | None = None) -> float:
    """First finite-size CDF correction, conjectured closed form
    -(1/10) (6 F2''(t) + (t^2/6) F2'(t))."""
    ev = airy_f2(t, tol, max_deriv=2)
    return -(6.0 * ev.derivs[1] + t * t / 6.0 * ev.derivs[0]) / 10.0


def f21_conjectured_deriv(t: float, order: int = 1,
                          tol: float | None = None) -> float:
    """Derivatives of the conjectured correction (orders 1..3), obtained by
    differentiating its closed form through the F2 derivatives."""
    ev = airy_f2(t, tol, max_deriv=min(3 + order - 1, 5))
    d = (ev.derivs + (0.0, 0.0))[:5]
    f2p, f2pp, f2ppp = d[0], d[1], d[2]
    if order == 1:
        return -(6.0 * f2ppp + t / 3.0 * f2p + t * t / 6.0 * f2pp) / 10.0
    f2_4 = d[3]
    if order == 2:
        return -(6.0 * f2_4 + f2p / 3.0 + 2.0 * t / 3.0 * f2pp
                 + t * t / 6.0 * f2ppp) / 10.0
    f2_5 = d[4]
    if order == 3:
        return -(6.0 * f2_5 + f2pp + t * f2ppp + t * t / 6.0 * f2_4) / 10.0
    raise ValueError("order must be 1, 2 or 3")

"""Exact power-series route to the distribution of L_n.

The cumulative probabilities P(L_n <= l) are Taylor coefficients of an
entire generating function f_l. Its logarithmic derivative data satisfy a
third-order ODE of Chazy-I type whose power-series coefficients a_k obey a
short quadratic recursion; composing with a series exponential then yields
the coefficients of f_l itself. Both recursions are carried out on scaled
integers,

    A_k = a_k * 4^k * (k!)^2,          C_k = c_k * (k!)^2,

which turn out to stay integral (every division in the recursion is exact,
and this is asserted at runtime), with C_k equal to the number of
permutations of k letters whose longest increasing subsequence is <= l.
This avoids all rational-number normalization overhead while remaining
exact.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import mpmath as mp
from gmpy2 import bincoef, mpz

from .cache import SeriesCache
from .config import DEFAULT
from .errors import PrecisionError, ReconstructionError
from .tables import ExactDistributionTable


def superfactorial(l: int) -> int:
    """0! * 1! * ... * (l-1)!"""
    out, f = 1, 1
    for j in range(1, l):
        f *= j
        out *= f
    return out


def log_bigint(v) -> float:
    """log of a positive (possibly huge) integer, in double precision."""
    b = v.bit_length()
    if b <= 900:
        return math.log(v)
    shift = b - 900
    return math.log(v >> shift) + shift * math.log(2.0)


# -- scaled integer recursions ----------------------------------------------

def _chazy_scaled_extend(l: int, A: list, K: int) -> None:
    """Extend A in place so that indices 0..K are valid.

    Recursion (scaled form of the Chazy-I coefficient recursion):
      A_{n+1} = [2 * sum_{m=l+1}^{n-l} m (3(n-m)+1) binom(n+1,m)^2 A_m A_{n+1-m}
                 - (4n-2)(n+1)^2 A_n] / ((n+1)(n^2-l^2)),
    starting from A_{l+1} = l+1. Each division must be exact.
    """
    if not A:
        A.extend(mpz(0) for _ in range(l + 2))
        A[l + 1] = mpz(l + 1)
    start = len(A) - 1
    if K <= start:
        return
    A.extend(mpz(0) for _ in range(K - start))
    for n in range(max(l + 1, start), K):
        s = mpz(0)
        for m in range(l + 1, n - l + 1):
            s += m * (3 * (n - m) + 1) * bincoef(n + 1, m) ** 2 * A[m] * A[n + 1 - m]
        num = 2 * s - (4 * n - 2) * (n + 1) ** 2 * A[n]
        q, rem = gmpy2.t_divmod(num, (n + 1) * (n * n - l * l))
        if rem != 0:
            raise AssertionError(f"chazy recursion lost integrality at l={l}, n={n}")
        A[n + 1] = q


def _counts_scaled_extend(l: int, A: list, C: list, K: int) -> None:
    """Extend C (scaled Taylor coefficients of f_l) in place to index K.

    Series exponential via the differential recurrence c' = c * g', scaled:
      C_{k+1} = (k+1) C_k - [sum_{j=l}^{k} binom(k+1,j+1)^2 A_{j+1} C_{k-j}] / (k+1).
    """
    if not C:
        C.append(mpz(1))
    start = len(C) - 1
    if K <= start:
        return
    _chazy_scaled_extend(l, A, K)
    for k in range(start, K):
        s = mpz(0)
        for j in range(l, k + 1):
            s += A[j + 1] * C[k - j] * bincoef(k + 1, j + 1) ** 2
        q, rem = gmpy2.t_divmod(s, k + 1)
        if rem != 0:
            raise AssertionError(f"count recursion lost integrality at l={l}, k={k}")
        C.append((k + 1) * C[k] - q)


class _SeriesStore:
    """In-memory store of scaled coefficient arrays, one pair per l,
    grown on demand and optionally mirrored to a disk cache. Reads after
    the initial build are safe to share across threads."""

    def __init__(self):
        self._data = {}
        self._lock = threading.Lock()
        self.disk: SeriesCache | None = SeriesCache()

    def get(self, l: int, K: int):
        with self._lock:
            entry = self._data.get(l)
            if entry is None:
                entry = ([], [])
                if self.disk is not None:
                    loaded = self.disk.load(l)
                    if loaded is not None:
                        entry = ([mpz(v) for v in loaded[0]],
                                 [mpz(v) for v in loaded[1]])
                self._data[l] = entry
            A, C = entry
            if len(C) - 1 < K:
                _counts_scaled_extend(l, A, C, K)
                if self.disk is not None:
                    try:
                        self.disk.store(l, A, C)
                    except OSError:
                        pass
            return A, C


_STORE = _SeriesStore()


def set_cache_dir(path) -> None:
    """Point the coefficient disk cache somewhere else (None disables)."""
    _STORE.disk = SeriesCache(path) if path is not None else None


def chazy_scaled(l: int, K: int) -> list:
    """Scaled coefficients A_0..A_K (integers)."""
    A, _ = _STORE.get(l, K)
    return A[:K + 1]


def scaled_counts(l: int, K: int) -> list:
    """C_0..C_K with C_k = #{permutations of k letters with L_k <= l}."""
    _, C = _STORE.get(l, K)
    return C[:K + 1]


# -- public series objects ---------------------------------------------------

@dataclass(frozen=True)
class ChazySeries:
    """Truncated power series of the log-derivative transcendent v_l.

    coeffs[k] is the exact rational a_k for 0 <= k <= K; a_k = 0 for
    k <= l and a_{l+1} = 1/(4^{l+1} l! (l+1)!).
    """

    l: int
    K: int
    coeffs: tuple

    def coefficient(self, k: int) -> Fraction:
        if k > self.K:
            raise IndexError(f"series truncated at K={self.K}")
        return self.coeffs[k]

    def radius_estimate(self) -> float:
        """Empirical convergence radius from the root test on |a_K|."""
        k = self.K
        a = self.coeffs[k]
        while a == 0 and k > 0:
            k -= 1
            a = self.coeffs[k]
        if k <= self.l:
            return math.inf
        logak = (math.log(abs(a.numerator)) - math.log(a.denominator))
        return math.exp(-logak / k)


def chazy_coefficients(l: int, K: int) -> ChazySeries:
    if l < 1:
        raise ValueError("l must be >= 1")
    if K < l + 1:
        raise ValueError(f"need K >= l+1 = {l + 1}")
    A = chazy_scaled(l, K)
    coeffs = [Fraction(0)] * (K + 1)
    fac2 = 1
    p4 = 1
    for k in range(1, K + 1):
        fac2 *= k * k
        p4 *= 4
        if A[k]:
            coeffs[k] = Fraction(int(A[k]), p4 * fac2)
    return ChazySeries(l=l, K=K, coeffs=tuple(coeffs))


@dataclass(frozen=True)
class GeneratingSeries:
    """Taylor coefficients c_k = P(L_k <= l) / k! of the entire generating
    function f_l, exact through order K."""

    l: int
    K: int
    taylor: tuple

    def coefficient(self, k: int) -> Fraction:
        return self.taylor[k]

    def count(self, n: int) -> int:
        """#{permutations of n letters with L_n <= l}."""
        c = self.taylor[n]
        return int(c * math.factorial(n) ** 2)

    def cdf(self, n: int) -> Fraction:
        return self.taylor[n] * math.factorial(n)


def generating_function_series(l: int, K: int) -> GeneratingSeries:
    if l < 1:
        raise ValueError("l must be >= 1")
    C = scaled_counts(l, K)
    taylor = [Fraction(0)] * (K + 1)
    fac2 = 1
    for k in range(K + 1):
        if k:
            fac2 *= k * k
        taylor[k] = Fraction(int(C[k]), fac2)
    return GeneratingSeries(l=l, K=K, taylor=tuple(taylor))


def cdf_fraction(l: int, n: int) -> Fraction:
    """Exact P(L_n <= l) straight from the series route."""
    if l >= n:
        return Fraction(1)
    if l < 1:
        return Fraction(0)
    C = scaled_counts(l, n)
    return Fraction(int(C[n]), math.factorial(n))


# -- ODE residual checks ------------------------------------------------------

def _poly_mul(p, q, order):
    out = [Fraction(0)] * (order + 1)
    for i, pi in enumerate(p):
        if pi == 0 or i > order:
            continue
        for j, qj in enumerate(q):
            if i + j > order:
                break
            if qj:
                out[i + j] += pi * qj
    return out


def chazy_residual(series: ChazySeries) -> list:
    """Coefficients of the Chazy-I ODE residual (times x^2), which must
    vanish exactly through order K-1 for a correctly truncated series."""
    K, l = series.K, series.l
    v = list(series.coeffs)
    d1 = [ (k + 1) * v[k + 1] for k in range(K) ]
    d2 = [ (k + 1) * (k + 2) * v[k + 2] for k in range(K - 1) ]
    d3 = [ (k + 1) * (k + 2) * (k + 3) * v[k + 3] for k in range(K - 2) ]
    order = K - 1
    res = [Fraction(0)] * (order + 1)
    for k, c in enumerate(d3):          # x^2 v'''
        if k + 2 <= order:
            res[k + 2] += c
    for k, c in enumerate(d2):          # x v''
        if k + 1 <= order:
            res[k + 1] += c
    for k, c in enumerate(_poly_mul(d1, d1, order - 1)):   # -6 x v'^2
        res[k + 1] -= 6 * c
    for k, c in enumerate(_poly_mul(v, d1, order)):        # 4 v v'
        res[k] += 4 * c
    for k, c in enumerate(d1):          # (x - l^2) v'
        if k + 1 <= order:
            res[k + 1] += c
        if k <= order:
            res[k] -= l * l * c
    for k, c in enumerate(v[:order + 1]):                  # - v/2
        res[k] -= Fraction(c, 2)
    return res


def sigma_piii_residual(series: ChazySeries) -> list:
    """Residual of the sigma-Painleve-III form
    (x v'')^2 - (l v')^2 + v'(v - x v')(4v' - 1),
    exact through order K + l - 1."""
    K, l = series.K, series.l
    v = list(series.coeffs)
    d1 = [ (k + 1) * v[k + 1] for k in range(K) ] + [Fraction(0)]
    d2 = [ (k + 1) * (k + 2) * v[k + 2] for k in range(K - 1) ]
    order = K + l - 1
    xd2 = [Fraction(0)] + d2            # x v''
    t1 = _poly_mul(xd2, xd2, order)
    t2 = _poly_mul(d1, d1, order)
    v_minus_xd1 = [v[k] - k * v[k] for k in range(K + 1)]   # v - x v'
    four_d1_minus_1 = [4 * c for c in d1]
    four_d1_minus_1[0] -= 1
    t3 = _poly_mul(_poly_mul(d1, v_minus_xd1, order), four_d1_minus_1, order)
    return [t1[k] - l * l * t2[k] + t3[k] for k in range(order + 1)]


# -- exact distribution table --------------------------------------------------

def exact_distribution_table(N: int, precision="auto", *, threads: int = 1,
                             progress=None) -> ExactDistributionTable:
    """Exact rational P(L_n = l) for all 1 <= l <= n <= N.

    precision:
      "rational"  scaled-integer route (exact arithmetic throughout);
      "auto"      rational for N <= 200, floating route beyond;
      int         floating route at that many decimal digits, with
                  rational reconstruction of every entry.

    The floating route mirrors significance arithmetic at
    ceil(2.5 log10(N!)) digits followed by continued-fraction recovery of
    the exact rationals; a failed recovery raises ReconstructionError
    rather than returning wrong values.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if precision == "auto":
        precision = "rational" if N <= DEFAULT.limits.rational_table_max_n else None
    if precision == "rational":
        cdf_cols = _cdf_columns_rational(N, threads=threads, progress=progress)
        meta = {"N": N, "precision": "rational"}
    else:
        dps = precision if isinstance(precision, int) else default_table_dps(N)
        cdf_cols = _cdf_columns_float(N, dps, progress=progress)
        meta = {"N": N, "precision": "float", "dps": dps}

    rows = []
    for n in range(1, N + 1):
        prev = Fraction(0)
        for l in range(1, n):
            cur = cdf_cols[l][n]
            rows.append((n, l, cur - prev))
            prev = cur
        rows.append((n, n, Fraction(1) - prev))
    table = ExactDistributionTable.from_rows(N, "chazy_series", rows, meta=meta)
    table.validate()
    return table


def default_table_dps(N: int) -> int:
    return int(math.ceil(2.5 * math.lgamma(N + 1) / math.log(10))) + 10


def _cdf_columns_rational(N, threads=1, progress=None):
    ls = list(range(1, N))
    if threads > 1 and len(ls) > 1:
        from multiprocessing import Pool
        with Pool(threads) as pool:
            results = pool.starmap(_rational_column_worker, [(l, N) for l in ls])
        cols = {l: col for l, col in zip(ls, results)}
        for l, col in cols.items():   # hydrate the in-process store for reuse
            pass
    else:
        cols = {}
        for l in ls:
            cols[l] = _rational_column_worker(l, N)
            if progress:
                progress(l, N)
    return cols


def _rational_column_worker(l, N):
    C = scaled_counts(l, N)
    fac = 1
    col = [Fraction(0)] * (N + 1)
    for n in range(N + 1):
        if n:
            fac *= n
        col[n] = Fraction(int(C[n]), fac) if n > l else Fraction(1)
    return col


def _cdf_columns_float(N, dps, progress=None):
    cols = {}
    with mp.workdps(dps):
        facs = [mp.mpf(1)]
        for n in range(1, N + 1):
            facs.append(facs[-1] * n)
        for l in range(1, N):
            Cf = _counts_float(l, N)
            col = [Fraction(0)] * (N + 1)
            for n in range(N + 1):
                if n <= l:
                    col[n] = Fraction(1)
                else:
                    x = Cf[n] / facs[n]
                    col[n] = reconstruct_rational(x, math.factorial(n), dps)
            cols[l] = col
            if progress:
                progress(l, N)
    return cols


def _counts_float(l, K):
    """Same recursions as the integer route, in mpf arithmetic at the
    ambient working precision."""
    A = [mp.mpf(0)] * (K + 2)
    A[l + 1] = mp.mpf(l + 1)
    for n in range(l + 1, K):
        s = mp.mpf(0)
        for m in range(l + 1, n - l + 1):
            s += m * (3 * (n - m) + 1) * int(bincoef(n + 1, m)) ** 2 * A[m] * A[n + 1 - m]
        A[n + 1] = (2 * s - (4 * n - 2) * (n + 1) ** 2 * A[n]) / ((n + 1) * (n * n - l * l))
    C = [mp.mpf(1)]
    for k in range(K):
        s = mp.mpf(0)
        for j in range(l, k + 1):
            s += A[j + 1] * C[k - j] * int(bincoef(k + 1, j + 1)) ** 2
        C.append((k + 1) * C[k] - s / (k + 1))
    return C


def reconstruct_rational(x, den_bound: int, dps: int) -> Fraction:
    """Continued-fraction recovery of a rational with denominator dividing
    den_bound from a floating approximation.

    Raises ReconstructionError unless the recovered fraction is well inside
    the uniqueness radius and its denominator divides den_bound.
    """
    sign, man, exp, _ = mp.mpf(x)._mpf_
    man, exp = int(man), int(exp)
    if man == 0:
        frac = Fraction(0)
    else:
        frac = Fraction((-1) ** sign * man) * Fraction(2) ** exp
    recon = frac.limit_denominator(den_bound)
    err = abs(frac - recon)
    if err != 0 and err * 2 * recon.denominator ** 2 > Fraction(1, 10 ** 6):
        raise ReconstructionError(
            f"rational reconstruction not unique at dps={dps}: "
            f"residual {float(err):.3e} vs denominator {recon.denominator}")
    if recon.denominator > 1 and den_bound % recon.denominator != 0:
        raise ReconstructionError(
            f"reconstructed denominator {recon.denominator} does not divide the bound")
    return recon


# -- Toeplitz determinant and its large-z behaviour ---------------------------

def toeplitz_determinant(l: int, z, dps: int = 30):
    """D_l(z) = det of the l x l Toeplitz matrix of modified Bessel
    functions I_{j-k}(2z), evaluated in elevated precision.

    The direct determinant cancels catastrophically as z grows, so the
    working precision is padded by an estimate of the digits lost; the
    result is recomputed with extra guard digits and both values must
    agree to the requested precision, else PrecisionError.
    """
    if l < 1 or l > 10:
        raise ValueError("direct Toeplitz determinant supported for 1 <= l <= 10")
    z = mp.mpf(z)
    if z < 0:
        raise ValueError("z must be positive")
    loss = int((l * l / 2) * mp.log10(2 * z + 2)) + l
    work = dps + max(loss, 0) + 15
    d1 = _toeplitz_det_at(l, z, work)
    d2 = _toeplitz_det_at(l, z, work + 20)
    if d2 != 0:
        rel = abs(d1 - d2) / abs(d2)
        if rel > mp.mpf(10) ** (-dps):
            raise PrecisionError(
                f"Toeplitz determinant unstable: relative wobble {mp.nstr(rel, 3)}")
    with mp.workdps(dps):
        return +d2


def _toeplitz_det_at(l, z, work):
    with mp.workdps(work):
        M = mp.matrix(l, l)
        vals = {m: mp.besseli(m, 2 * z) for m in range(-(l - 1), l)}
        for j in range(l):
            for k in range(l):
                M[j, k] = vals[j - k]
        return mp.det(M)


def asymptotic_toeplitz(l: int, z):
    """Leading large-z form: c_l e^{2lz} / ((2 pi)^{l/2} (2z)^{l^2/2}) with
    the superfactorial constant c_l."""
    z = mp.mpf(z)
    return (superfactorial(l) * mp.e ** (2 * l * z)
            / ((2 * mp.pi) ** (mp.mpf(l) / 2) * (2 * z) ** (mp.mpf(l * l) / 2)))


def validate_asymptotic_constant(l: int, z_ladder=(8, 16, 32, 64), dps: int = 20):
    """Max over the ladder of z * |D_l(z)/asymptotic - 1|.

    Bounded (and roughly constant) iff the determinant follows the
    superfactorial leading constant with an O(1/z) relative error.
    """
    if l > 8:
        raise ValueError("validated for l <= 8")
    worst = 0.0
    for z in z_ladder:
        work = dps + int(2 * l * z / math.log(10)) + 30
        with mp.workdps(work):
            d = _toeplitz_det_at(l, mp.mpf(z), work)
            ratio = d / asymptotic_toeplitz(l, z)
            worst = max(worst, float(abs(ratio - 1) * z))
    return worst


def series_radius_estimate(l: int, K: int = 160) -> float:
    """Empirical radius of convergence of the v_l power series."""
    return chazy_coefficients(l, K).radius_estimate()

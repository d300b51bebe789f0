"""Combinatorial ground truth for the length distribution of longest
increasing subsequences.

Everything here is exact (rational arithmetic) or statistically controlled
(seeded Monte Carlo); it serves as the oracle layer against which the
analytic machinery is validated at small scale.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations as _all_permutations

import numpy as np

from .config import DEFAULT
from .errors import SizeLimitError
from .tables import ExactDistributionTable


@dataclass(frozen=True)
class Permutation:
    """A permutation of {1..n}, stored one-line as (sigma_1, ..., sigma_n)."""

    entries: tuple

    def __post_init__(self):
        n = len(self.entries)
        if n < 1:
            raise ValueError("permutation must have length >= 1")
        if sorted(self.entries) != list(range(1, n + 1)):
            raise ValueError("entries must be a bijection of {1..n}")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @classmethod
    def identity(cls, n):
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def reversed_identity(cls, n):
        return cls(tuple(range(n, 0, -1)))


def longest_increasing_length(perm) -> int:
    """Length of the longest strictly increasing subsequence.

    Patience sorting with binary search: each element replaces the top of
    the leftmost pile whose top is >= element; the number of piles is the
    LIS length. O(n log n).
    """
    piles = []
    for x in perm:
        i = bisect_left(piles, x)
        if i == len(piles):
            piles.append(x)
        else:
            piles[i] = x
    return len(piles)


def brute_force_distribution(n: int, *, max_n: int = DEFAULT.limits.brute_force_max_n
                             ) -> ExactDistributionTable:
    """Exact distribution of L_n by full enumeration of S_n.

    Guarded at n <= 11 (factorial blow-up); use the hook-length or series
    routes beyond.
    """
    if n > max_n:
        raise SizeLimitError(f"brute force limited to n <= {max_n}, got {n}")
    if n < 1:
        raise ValueError("n must be >= 1")
    counts = Counter(longest_increasing_length(p)
                     for p in _all_permutations(range(1, n + 1)))
    fact = math.factorial(n)
    rows = [(n, l, Fraction(counts.get(l, 0), fact)) for l in range(1, n + 1)]
    return ExactDistributionTable.from_rows(n, "brute_force", rows,
                                            meta={"n": n})


# -- hook length route ------------------------------------------------------

def partitions(n: int):
    """Yield integer partitions of n as descending tuples, lexicographic
    by descending parts."""
    a = [n]
    while True:
        yield tuple(a)
        # find rightmost part > 1
        j = len(a) - 1
        while j >= 0 and a[j] == 1:
            j -= 1
        if j < 0:
            return
        a[j] -= 1
        rem = len(a) - 1 - j
        rest = rem + 1
        cap = a[j]
        del a[j + 1:]
        while rest > 0:
            take = min(cap, rest)
            a.append(take)
            rest -= take


def standard_tableaux_count(shape) -> int:
    """Number of standard Young tableaux of the given shape (hook lengths)."""
    n = sum(shape)
    conj = _conjugate(shape)
    prod = 1
    for i, row in enumerate(shape):
        for j in range(row):
            prod *= row - j + conj[j] - i - 1
    return math.factorial(n) // prod


def _conjugate(shape):
    conj = []
    for j in range(shape[0]):
        conj.append(sum(1 for row in shape if row > j))
    return conj


def hook_length_distribution(n: int, *, max_n: int = DEFAULT.limits.hook_max_n
                             ) -> ExactDistributionTable:
    """Exact distribution of L_n via the hook length formula.

    The RSK correspondence sends a permutation to a pair of standard
    tableaux of the same shape, with L_n equal to the first-row length, so
    P(L_n <= l) = sum of d_shape^2 over shapes with first row <= l, / n!.
    """
    if n > max_n:
        raise SizeLimitError(f"hook-length route limited to n <= {max_n}, got {n}")
    if n < 1:
        raise ValueError("n must be >= 1")
    by_first_row = [0] * (n + 1)
    for shape in partitions(n):
        d = standard_tableaux_count(shape)
        by_first_row[shape[0]] += d * d
    fact = math.factorial(n)
    rows = [(n, l, Fraction(by_first_row[l], fact)) for l in range(1, n + 1)]
    return ExactDistributionTable.from_rows(n, "hook_length", rows,
                                            meta={"n": n})


def goulden_pdf(n: int, l: int) -> Fraction:
    """P(L_n = l) by Goulden's alternating triple sum

        sum_{i+j+k <= n-l} (-1)^{i+j} n! / (i! j! k! (n-i-k)! (n-j-k)!).

    Only valid for l >= (n-1)/2; the formula breaks down below that range,
    so the precondition is enforced. Scaling by n! turns every term into a
    product of two trinomial coefficients times k!, so the whole sum is
    accumulated in integer arithmetic.
    """
    if n < 1 or l < 1 or l > n:
        raise ValueError(f"need 1 <= l <= n, got n={n} l={l}")
    if 2 * l < n - 1:
        raise ValueError(f"goulden_pdf requires l >= (n-1)/2, got n={n} l={l}")
    fact = [math.factorial(m) for m in range(n + 1)]
    total = 0
    top = n - l
    for i in range(top + 1):
        for j in range(top + 1 - i):
            for k in range(top + 1 - i - j):
                sign = -1 if (i + j) % 2 else 1
                t1 = fact[n] // (fact[i] * fact[k] * fact[n - i - k])
                t2 = fact[n] // (fact[j] * fact[k] * fact[n - j - k])
                total += sign * t1 * t2 * fact[k]
    return Fraction(total, fact[n])


# -- Monte Carlo -------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloResult:
    """Empirical distribution of L_n from `trials` seeded samples.

    `counts[l]` is the number of trials with L_n = l (index 0 unused);
    the standard-error scale of any CDF estimate is ~ 1/sqrt(trials).
    """

    n: int
    trials: int
    seed: int
    workers: int
    counts: np.ndarray

    @property
    def stderr_scale(self) -> float:
        return 1.0 / math.sqrt(self.trials)

    def cdf(self, l: int) -> float:
        if l >= self.n:
            return 1.0
        if l < 1:
            return 0.0
        return float(self.counts[1:l + 1].sum()) / self.trials

    def pdf(self, l: int) -> float:
        if not 1 <= l <= self.n:
            return 0.0
        return float(self.counts[l]) / self.trials

    def cdf_stderr(self, l: int) -> float:
        p = self.cdf(l)
        return math.sqrt(max(p * (1.0 - p), 1.0 / self.trials) / self.trials)


def _lis_lengths_batch(perms: np.ndarray) -> np.ndarray:
    """Vectorized patience sorting over rows of an integer matrix."""
    B, n = perms.shape
    piles = np.full((B, n), np.iinfo(np.int64).max, dtype=np.int64)
    rows = np.arange(B)
    for j in range(n):
        x = perms[:, j].astype(np.int64)
        idx = (piles < x[:, None]).sum(axis=1)
        piles[rows, idx] = x
    return (piles < np.iinfo(np.int64).max).sum(axis=1)


def monte_carlo_cdf(n: int, trials: int, seed: int, *, workers: int = 1,
                    batch: int = 100_000) -> MonteCarloResult:
    """Empirical distribution of L_n over uniform random permutations.

    Permutations are drawn with Fisher-Yates shuffles driven by the Philox
    counter-based generator; each worker uses the stream derived from
    (seed, worker index) and results are merged deterministically, so the
    output is bit-reproducible for a fixed (seed, workers) pair regardless
    of scheduling.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    base = trials // workers
    chunks = [base + (1 if w < trials % workers else 0) for w in range(workers)]
    counts = np.zeros(n + 1, dtype=np.int64)
    template = np.arange(1, n + 1, dtype=np.int64)
    for w, chunk in enumerate(chunks):
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence(entropy=seed, spawn_key=(w,))))
        done = 0
        while done < chunk:
            b = min(batch, chunk - done)
            perms = rng.permuted(np.tile(template, (b, 1)), axis=1)
            lengths = _lis_lengths_batch(perms)
            counts += np.bincount(lengths, minlength=n + 1)
            done += b
    return MonteCarloResult(n=n, trials=trials, seed=seed, workers=workers,
                            counts=counts)

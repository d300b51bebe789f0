"""Exact rational distribution tables and their serialization.

A table stores P(L_n = l) as exact rationals for 1 <= l <= n <= max_n.
The JSON schema is rows of {n, l, numerator, denominator}; CSV renders
decimals at a requested precision.
"""

from __future__ import annotations

import csv
import gzip
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

JSON_SCHEMA = "lisdist.exact-table.v1"

SOURCES = ("brute_force", "hook_length", "chazy_series", "goulden")


@dataclass
class ExactDistributionTable:
    """P(L_n = l) as exact rationals, immutable after construction."""

    max_n: int
    source: str
    meta: dict = field(default_factory=dict)
    # _pdf[n] is a list of Fractions indexed l = 1..n
    _pdf: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown table source {self.source!r}")

    @classmethod
    def from_rows(cls, max_n, source, rows, meta=None):
        """rows: iterable of (n, l, Fraction)."""
        pdf = {n: [Fraction(0)] * (n + 1) for n in range(1, max_n + 1)}
        for n, l, p in rows:
            pdf[n][l] = Fraction(p)
        return cls(max_n=max_n, source=source, meta=meta or {}, _pdf=pdf)

    def pdf(self, n: int, l: int) -> Fraction:
        if not 1 <= n <= self.max_n:
            raise KeyError(f"n={n} outside table range 1..{self.max_n}")
        if l < 1 or l > n:
            return Fraction(0)
        return self._pdf[n][l]

    def cdf(self, n: int, l: int) -> Fraction:
        if l >= n:
            return Fraction(1)
        if l < 1:
            return Fraction(0)
        return sum(self._pdf[n][1:l + 1], Fraction(0))

    def row(self, n: int) -> list[Fraction]:
        """PDF row [P(L_n=1), ..., P(L_n=n)]."""
        return list(self._pdf[n][1:])

    def mean(self, n: int) -> Fraction:
        return sum((l * p for l, p in enumerate(self._pdf[n])), Fraction(0))

    def variance(self, n: int) -> Fraction:
        m = self.mean(n)
        m2 = sum((l * l * p for l, p in enumerate(self._pdf[n])), Fraction(0))
        return m2 - m * m

    def validate(self) -> None:
        """Check row sums are exactly one and entries lie in [0, 1]."""
        for n in range(1, self.max_n + 1):
            row = self._pdf[n]
            if sum(row[1:], Fraction(0)) != 1:
                raise AssertionError(f"row n={n} does not sum to 1")
            if any(p < 0 or p > 1 for p in row[1:]):
                raise AssertionError(f"row n={n} has entries outside [0,1]")

    # -- serialization -------------------------------------------------

    def to_json(self, path) -> None:
        doc = {
            "schema": JSON_SCHEMA,
            "source": self.source,
            "max_n": self.max_n,
            "meta": self.meta,
            "entries": [
                {"n": n, "l": l, "numerator": str(p.numerator),
                 "denominator": str(p.denominator)}
                for n in range(1, self.max_n + 1)
                for l, p in enumerate(self._pdf[n])
                if l >= 1 and p != 0
            ],
        }
        path = Path(path)
        data = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        if path.suffix == ".gz":
            with gzip.open(path, "wt") as f:
                f.write(data)
        else:
            path.write_text(data)

    @classmethod
    def from_json(cls, path) -> "ExactDistributionTable":
        path = Path(path)
        if path.suffix == ".gz":
            with gzip.open(path, "rt") as f:
                doc = json.load(f)
        else:
            doc = json.loads(path.read_text())
        if doc.get("schema") != JSON_SCHEMA:
            raise ValueError(f"unexpected schema {doc.get('schema')!r}")
        rows = ((e["n"], e["l"], Fraction(int(e["numerator"]), int(e["denominator"])))
                for e in doc["entries"])
        return cls.from_rows(doc["max_n"], doc["source"], rows, meta=doc.get("meta"))

    def to_csv(self, path_or_buf, digits: int = 15) -> None:
        """Decimal rendering at `digits` significant digits."""
        own = isinstance(path_or_buf, (str, Path))
        f = open(path_or_buf, "w", newline="") if own else path_or_buf
        try:
            w = csv.writer(f)
            w.writerow(["n", "l", "probability", "numerator", "denominator"])
            for n in range(1, self.max_n + 1):
                for l in range(1, n + 1):
                    p = self._pdf[n][l]
                    dec = _decimal_str(p, digits)
                    w.writerow([n, l, dec, p.numerator, p.denominator])
        finally:
            if own:
                f.close()

    def to_csv_string(self, digits: int = 15) -> str:
        buf = io.StringIO()
        self.to_csv(buf, digits)
        return buf.getvalue()


def _decimal_str(p: Fraction, digits: int) -> str:
    if p == 0:
        return "0"
    import mpmath as mp
    with mp.workdps(digits + 10):
        return mp.nstr(mp.mpf(p.numerator) / p.denominator, digits)

"""Package-wide configuration constants and defaults."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

VERSION = "0.1.0"

CACHE_DIR_ENV = "LISDIST_CACHE_DIR"


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_DIR_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "lisdist"


@dataclass(frozen=True)
class Limits:
    """Desk-scale size guards.

    All caps are runtime-safety bounds, not mathematical ones; raise them
    only if you are prepared to wait.
    """

    brute_force_max_n: int = 11          # n! enumeration guard
    hook_max_n: int = 40                 # partition-count guard
    rational_table_max_n: int = 200      # pure-rational table is authoritative up to here
    exact_table_max_n: int = 500         # CLI guard without --paper-scale
    series_backend_max_n: int = 500      # Stirling auxiliaries via exact series up to here
    paper_scale_table_max_n: int = 1000


@dataclass(frozen=True)
class Tolerances:
    """Default numerical tolerances for the floating-point backends."""

    kernel_tol: float = 1e-12            # Fredholm doubling target
    kernel_tol_large_n: float = 1e-10    # relaxed beyond n = 10^6 (formula error dominates)
    saddle_rtol: float = 1e-9            # |a(r) - n| <= saddle_rtol * n
    h_series_switch: float = 1e-4        # h - log1p(h) Taylor switchover
    large_n_threshold: float = 1e6


@dataclass(frozen=True)
class QuadratureDefaults:
    """Nystrom discretization defaults."""

    m_start: int = 16
    max_doublings: int = 8               # node counts 16 .. 4096
    airy_cutoff: float = 14.0            # Airy kernel norm < 1e-18 beyond this point
    airy_map_rate: float = 3.0           # exponential-type map steepness on (s, cutoff)
    window_alpha_min: float = 60.0       # below this order, no turning-point window
    window_width: float = 14.0           # Bessel turning-point window, units of alpha^{-2/3}
    max_nodes: int = 4096


@dataclass(frozen=True)
class Config:
    limits: Limits = field(default_factory=Limits)
    tol: Tolerances = field(default_factory=Tolerances)
    quad: QuadratureDefaults = field(default_factory=QuadratureDefaults)
    # Monte Carlo RNG family; counter-based for cross-platform seed stability
    rng_family: str = "philox"
    fit_dps: int = 60                    # extended precision for asymptotic least squares


DEFAULT = Config()

"""lisdist: the distribution of longest increasing subsequence lengths.

Exact rational tables (combinatorial and power-series routes), a
saddle-point approximation valid out to n ~ 10^12, Tracy-Widom evaluation
through Fredholm determinants, and finite-size correction analysis.
"""

from .config import VERSION as __version__
from .corrections import (CorrectionFit, ExpansionFit, ScaledResidualSet,
                          fit_correction, fit_mean_variance, fit_power_law,
                          fit_two_windows, matching_digits, max_abs_errors,
                          moment_integral, pdf_expansion, scaled_residuals,
                          t_scaled, t_scaled_half, trapezoid_moment,
                          variance_combination)
from .errors import (ConvergenceError, LisdistError, OutsideFitIntervalError,
                     PrecisionError, ReconstructionError, SizeLimitError)
from .kernels import (HardEdgeEval, TracyWidomEval, airy_f2,
                      bessel_kernel_matrix, connection_asymptotic, f2_cdf,
                      f21_conjectured, f21_conjectured_deriv, hard_edge_eval)
from .oracle import (MonteCarloResult, Permutation, brute_force_distribution,
                     goulden_pdf, hook_length_distribution,
                     longest_increasing_length, monte_carlo_cdf)
from .series import (ChazySeries, GeneratingSeries, cdf_fraction,
                     chazy_coefficients, chazy_residual,
                     exact_distribution_table, generating_function_series,
                     sigma_piii_residual, toeplitz_determinant,
                     validate_asymptotic_constant)
from .stirling import (AuxiliaryEval, BoltzmannProfile, CountEstimate,
                       SaddleResult, StirlingResult, auxiliary_eval,
                       boltzmann_profile, monotonicity_violations,
                       regev_count, solve_radius, stirling_cdf, stirling_pdf,
                       stirling_profile, tau_n)
from .tables import ExactDistributionTable

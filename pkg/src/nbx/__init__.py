"""Dilated fractional-part bases on (0,1): certified pairings, rearrangement
and K-functional machinery, weighted sup-extrapolation norms, and desk-scale
distance minimisation, with a batch CLI."""

from .basis import (CHI, LOG_GENERATOR, CoefficientVector, DilationBasis,
                    breakpoints, eval_rho, phi_constraint_residual,
                    residual_function)
from .exceptions import (ConfigError, ConvergenceError, GridInstabilityError,
                         IllConditionedError, NbxError, NotQuasiConcaveError,
                         OptimizationError, ToleranceNotReachedError)
from .extrapolation import (TemperedWeight, default_t_grid,
                            default_theta_grid, delta_norm,
                            delta_norm_theta_restricted, omega_from_weight,
                            parse_weight, weight_presets)
from .indices import (QuasiConcaveSample, almost_increasing_gamma,
                      estimate_indices, scan_indices)
from .kfunc import (ThetaParams, j_l1_l2, k_l1_l2, k_l1_l2_exact,
                    profile_samples, theta_q_norm, theta_q_norm_with_argmax)
from .minimizer import (DeltaBudget, DistanceReport, delta_distance,
                        get_gram, l2_crosscheck, l2_distance, sweep,
                        sweep_sizes)
from .pairings import (GramData, gram_matrix, inner_product,
                       inner_product_with_bound, residual_tail_moments)
from .piecewise import PiecewiseFunction
from .rearrangement import (RearrangementProfile, double_star, k_l1_linf,
                            rearrange)

__version__ = "0.1.0"

__all__ = [
    "CHI", "LOG_GENERATOR", "CoefficientVector", "ConfigError", "ConvergenceError",
    "DeltaBudget", "DilationBasis", "DistanceReport", "GramData",
    "GridInstabilityError", "IllConditionedError", "NbxError",
    "NotQuasiConcaveError", "OptimizationError", "PiecewiseFunction",
    "QuasiConcaveSample", "RearrangementProfile", "TemperedWeight",
    "ThetaParams", "ToleranceNotReachedError", "almost_increasing_gamma",
    "breakpoints", "default_t_grid", "default_theta_grid", "delta_distance",
    "delta_norm", "delta_norm_theta_restricted", "double_star",
    "estimate_indices", "eval_rho", "get_gram", "gram_matrix",
    "inner_product", "inner_product_with_bound", "j_l1_l2", "k_l1_l2",
    "k_l1_l2_exact", "k_l1_linf", "l2_crosscheck", "l2_distance",
    "omega_from_weight", "parse_weight", "phi_constraint_residual",
    "profile_samples", "rearrange", "residual_function",
    "residual_tail_moments", "scan_indices", "sweep", "sweep_sizes",
    "theta_q_norm", "theta_q_norm_with_argmax", "weight_presets",
]

"""Dixmier traces on Lorentz spaces with concave weights.

Weights, decreasing rearrangements, the partial-sum / cutoff / zeta / heat
functionals, extrapolation norms and a one-dimensional Weyl quantizer.
"""
__version__ = "0.1.0"

from .errors import ConfigError, DomainError, NumericError, UnsupportedWeightError
from .weight import WeightFunction, check_conditions, c_zeta, k_psi
from .rearrange import (AnalyticProfile, FiniteProfile, HarmonicProfile, SequenceProfile,
                        lorentz_norm, mu_from_grid, mu_from_values)
from .traces import (LimitEstimate, ScaleGrid, compare_all, cutoff_functional, heat_functional,
                     heat_membership, limit_estimate, partial_sum_functional, zeta_functional)
from .extrapolate import equality_criteria, frak_norms

__all__ = [
    "__version__", "ConfigError", "DomainError", "NumericError", "UnsupportedWeightError",
    "WeightFunction", "check_conditions", "c_zeta", "k_psi",
    "AnalyticProfile", "FiniteProfile", "HarmonicProfile", "SequenceProfile",
    "lorentz_norm", "mu_from_grid", "mu_from_values",
    "LimitEstimate", "ScaleGrid", "compare_all", "cutoff_functional", "heat_functional",
    "heat_membership", "limit_estimate", "partial_sum_functional", "zeta_functional",
    "equality_criteria", "frak_norms",
]

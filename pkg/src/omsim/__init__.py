"""Steady-state optomechanical entanglement in the linearized Gaussian regime.

All frequencies are angular frequencies in rad/s.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .entanglement import (EntanglementReport, extract_pair, log_negativity, pair_negativity,
                           physicality_check)
from .exceptions import (ConfigError, ConvergenceError, NumericalError, OmsimError,
                         UnphysicalStateError, UnstableModelError)
from .lyapunov import CovarianceMatrix, integral_oracle, solve_lyapunov, stochastic_oracle
from .model import (LinearModel, ModelKind, build_array, build_filter, build_inverse_filter,
                    build_model, build_original)
from .params import (CONSTANTS, DerivedParams, MeanField, PhysicalConstants, PhysicalParams,
                     array_mean_fields, cavity_mean_field, delta0_from_delta, derive_params,
                     effective_coupling, thermal_occupation)
from .stability import (StabilityReport, assess_stability, char_poly, explicit_filter_conditions,
                        routh_hurwitz_quartic, spectral_stable)

__all__ = [
    "CONSTANTS", "ConfigError", "ConvergenceError", "CovarianceMatrix", "DerivedParams",
    "EntanglementReport", "LinearModel", "MeanField", "ModelKind", "NumericalError", "OmsimError",
    "PhysicalConstants", "PhysicalParams", "StabilityReport", "UnphysicalStateError",
    "UnstableModelError", "array_mean_fields", "assess_stability", "build_array", "build_filter",
    "build_inverse_filter", "build_model", "build_original", "cavity_mean_field", "char_poly",
    "delta0_from_delta", "derive_params", "effective_coupling", "explicit_filter_conditions",
    "extract_pair", "integral_oracle", "log_negativity", "pair_negativity", "physicality_check",
    "routh_hurwitz_quartic", "solve_lyapunov", "spectral_stable", "stochastic_oracle",
    "thermal_occupation",
]

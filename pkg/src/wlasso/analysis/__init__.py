"""Diagnostics: cone factors, noise calibration, selection and sparsity checks."""

from .calibration import (
    DataSummary,
    bregman_oracle_bound,
    event_xi_check,
    monte_carlo_event_probability,
    noise_functionals,
    oracle_bound,
    penalty_level,
    weight_bound_event,
)
from .cones import ConeSpec
from .factors import (
    InvertibilityReport,
    compatibility_constant,
    cone_search_min,
    f2_factor,
    glm_gif_lower_bounds,
    invertibility_report,
    restricted_eigenvalue,
    simple_gif,
)
from .selection import SelectionReport, irrepresentable_check
from .sparsity import SparsityReport, default_d_star, src_and_dimension_bound

__all__ = [
    "ConeSpec",
    "DataSummary",
    "InvertibilityReport",
    "SelectionReport",
    "SparsityReport",
    "bregman_oracle_bound",
    "compatibility_constant",
    "cone_search_min",
    "default_d_star",
    "event_xi_check",
    "f2_factor",
    "glm_gif_lower_bounds",
    "invertibility_report",
    "irrepresentable_check",
    "monte_carlo_event_probability",
    "noise_functionals",
    "oracle_bound",
    "penalty_level",
    "restricted_eigenvalue",
    "simple_gif",
    "src_and_dimension_bound",
    "weight_bound_event",
]

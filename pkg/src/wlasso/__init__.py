"""Weighted l1-penalized convex minimization for generalized linear models.

Library layout:

* :mod:`wlasso.families`   GLM losses, gradients, Bregman divergence
* :mod:`wlasso.penalties`  l1 / mcp / scad penalties and adaptive weights
* :mod:`wlasso.solver`     weighted Lasso solver with KKT certification
* :mod:`wlasso.multistage` adaptive step, recursion, contraction radii
* :mod:`wlasso.analysis`   cone factors, calibration, selection, sparsity
* :mod:`wlasso.bench`      synthetic data, experiments, report serialization
* :mod:`wlasso.cli`        command-line entry point
"""

from .families import (
    Dataset,
    GlmFamily,
    LossEvaluation,
    bregman_divergence,
    evaluate_loss,
    gradient_check,
    gram_matrix,
    hessian_matrix,
)
from .penalties import (
    PenaltySpec,
    lipschitz_kappa,
    rho_derivative,
    rho_value,
    weights_from_estimate,
)
from .solver import FitConfig, FitResult, fit_weighted_lasso, kkt_certificate, solution_path
from .multistage import (
    ContractionReport,
    MultistageConfig,
    StageTrace,
    contraction_report,
    run_adaptive_step,
    run_recursion,
    suggested_stage_count,
)

__version__ = "0.1.0"

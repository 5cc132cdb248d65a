"""Adaptive Lasso step and its multistage recursion.

Stage 0 is the unweighted Lasso. Stage k+1 refits with weights
rho'(|beta^(k)_j|)/lambda, so a concave penalty progressively releases
strong coefficients from shrinkage. ``contraction_report`` evaluates
the geometric error-radius recursion implied by one adaptive step and
flags whether its applicability conditions hold for the given inputs.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .families import Dataset, GlmFamily
from .penalties import PenaltySpec, weights_from_estimate
from .solver import FitConfig, FitResult, fit_weighted_lasso

__all__ = [
    "MultistageConfig",
    "StageRecord",
    "StageTrace",
    "ContractionReport",
    "run_adaptive_step",
    "run_recursion",
    "contraction_report",
    "suggested_stage_count",
]


@dataclass(frozen=True)
class MultistageConfig:
    penalty: PenaltySpec
    stages: int = 3
    base_fit: FitConfig | None = None
    track_target: np.ndarray | None = None

    def __post_init__(self):
        if self.stages < 1:
            raise DomainError("stages must be >= 1")


@dataclass(frozen=True)
class StageRecord:
    stage: int
    beta: np.ndarray
    weights_used: np.ndarray
    kkt_residual: float
    active_set_size: int
    converged: bool
    objective: float
    l2_error_to_target: float | None = None


@dataclass(frozen=True)
class StageTrace:
    """Per-stage solutions of the recursion, stage 0 first."""

    records: tuple

    def __getitem__(self, k: int) -> StageRecord:
        return self.records[k]

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final_beta(self) -> np.ndarray:
        return self.records[-1].beta

    def l2_errors(self) -> list:
        return [r.l2_error_to_target for r in self.records]


def _stage_config(base: FitConfig | None, lam: float, weights, warm) -> FitConfig:
    if base is None:
        return FitConfig(lam=lam, weights=weights, warm_start=warm)
    return FitConfig(
        lam=lam,
        weights=weights,
        max_outer_iterations=base.max_outer_iterations,
        max_inner_sweeps=base.max_inner_sweeps,
        kkt_tolerance=base.kkt_tolerance,
        coordinate_tolerance=base.coordinate_tolerance,
        warm_start=warm,
    )


def run_adaptive_step(
    data: Dataset,
    family: GlmFamily,
    penalty: PenaltySpec,
    beta_tilde,
    base_fit: FitConfig | None = None,
    unpenalized=(),
) -> FitResult:
    """One adaptive refit: weights from ``beta_tilde``, then a weighted Lasso."""
    w = weights_from_estimate(penalty, beta_tilde, unpenalized=unpenalized)
    cfg = _stage_config(base_fit, penalty.lam, w, np.asarray(beta_tilde, dtype=float))
    return fit_weighted_lasso(data, family, cfg)


def run_recursion(data: Dataset, family: GlmFamily, config: MultistageConfig) -> StageTrace:
    """Run the multistage recursion and record every stage.

    Stage 0 is the unweighted Lasso; each later stage reuses the
    previous solution as warm start (the minimizer is unchanged by
    warm starting since every stage problem is convex). A stage that
    exhausts its budgets is recorded as non-converged and the
    recursion continues from its iterate.
    """
    penalty = config.penalty
    lam = penalty.lam
    target = None
    if config.track_target is not None:
        target = np.asarray(config.track_target, dtype=float).ravel()

    records = []
    ones = np.ones(data.p)
    fit = fit_weighted_lasso(data, family, _stage_config(config.base_fit, lam, ones, None))
    records.append(_record(0, fit, ones, target))

    beta_prev = fit.beta_hat
    for k in range(1, config.stages + 1):
        w = weights_from_estimate(penalty, beta_prev)
        fit = fit_weighted_lasso(
            data, family, _stage_config(config.base_fit, lam, w, beta_prev)
        )
        records.append(_record(k, fit, w, target))
        beta_prev = fit.beta_hat
    return StageTrace(records=tuple(records))


def _record(stage, fit: FitResult, weights, target) -> StageRecord:
    err = None
    if target is not None:
        err = float(np.linalg.norm(fit.beta_hat - target))
    return StageRecord(
        stage=stage,
        beta=fit.beta_hat,
        weights_used=np.asarray(weights, dtype=float),
        kkt_residual=fit.kkt_residual,
        active_set_size=fit.active_size,
        converged=fit.converged,
        objective=fit.objective,
        l2_error_to_target=err,
    )


@dataclass(frozen=True)
class ContractionReport:
    """Error-radius recursion R^(k) = (1-r0^k) R^inf + r0^k R^(0)."""

    r0: float
    lam: float
    radii: tuple
    r_infinity: float
    contraction: bool
    conditions: dict
    inputs: dict
    suggested_stages: int | None

    def radius(self, k: int) -> float:
        return self.radii[k]


def suggested_stage_count(r0: float, r_initial: float, r_infinity: float) -> int | None:
    """Stages needed to bring the radius within a factor two of its limit."""
    if not (0 < r0 < 1) or r_infinity <= 0 or r_initial <= r_infinity:
        return None
    return max(1, math.ceil(math.log(r_initial / r_infinity) / abs(math.log(r0))))


def contraction_report(
    kappa: float,
    f_star: float,
    f0_phi2: float,
    s0_size: int,
    eta: float,
    gamma0: float,
    a_const: float,
    lambda0: float,
    rho_s0_norm: float,
    noise_s0_norm: float,
    ell_star: int,
    stages: int,
    f0_phi0: float = math.inf,
) -> ContractionReport:
    """Evaluate the one-step contraction factor and the radius sequence.

    ``f_star`` is the certified curvature lower bound (must not exceed
    the cone factor F2 for the relevant supports), ``f0_phi2`` the
    simple invertibility factor with the scaled l2 seminorm, and
    ``f0_phi0`` the factor attached to the neighborhood functional
    (infinite for the quadratic loss, where no neighborhood constraint
    is needed). ``rho_s0_norm`` and ``noise_s0_norm`` are the l2 norms
    of the penalty derivative at the true signal and of the on-support
    score noise. When r0 >= 1 there is no contraction and only the
    stage-0 radius is reported.
    """
    if not (0 < eta < 1):
        raise DomainError("eta must lie in (0, 1)")
    if kappa < 0:
        raise DomainError("kappa must be nonnegative")
    if kappa > 0 and not (0 < gamma0 < 1.0 / kappa):
        raise DomainError("gamma0 must lie in (0, 1/kappa)")
    if kappa == 0 and not gamma0 > 0:
        raise DomainError("gamma0 must be positive")
    if not a_const > 1:
        raise DomainError("a_const must exceed 1")
    if not (f_star > 0 and f0_phi2 > 0):
        raise DomainError("factors must be positive")

    lam = a_const * lambda0 / (1.0 - kappa * gamma0)
    r0 = (math.exp(eta) / f_star) * (kappa + 1.0 / (gamma0 * a_const) - kappa / a_const)
    r_initial = (
        math.exp(eta)
        * lam
        * (1.0 + (1.0 - kappa * gamma0) / a_const)
        * math.sqrt(s0_size)
        / f0_phi2
    )

    contraction = r0 < 1.0
    if contraction:
        r_infinity = (rho_s0_norm + noise_s0_norm) * math.exp(eta) / (f_star * (1.0 - r0))
        radii = tuple(
            (1.0 - r0**k) * r_infinity + r0**k * r_initial for k in range(stages + 1)
        )
    else:
        r_infinity = math.inf
        radii = (r_initial,)

    xi_required = (a_const + 1.0) / (a_const - 1.0)
    xi_adaptive = (a_const + 1.0 - kappa * gamma0) / (a_const - 1.0)
    first_rhs = (
        math.inf if math.isinf(f0_phi0) else f0_phi0 * eta * math.exp(-eta)
    )
    conditions = {
        "adaptive_penalty_level": lambda0 * (1.0 + a_const / (1.0 - kappa * gamma0))
        <= first_rhs,
        "recursive_initial_radius": r_initial <= gamma0 * lam * math.sqrt(ell_star),
        "recursive_limit_radius": contraction
        and r_infinity <= gamma0 * lam * math.sqrt(ell_star),
        "contraction": contraction,
    }
    inputs = {
        "eta": eta,
        "gamma0": gamma0,
        "a_const": a_const,
        "xi_required": xi_required,
        "xi_adaptive_only": xi_adaptive,
        "kappa": kappa,
        "f_star": f_star,
        "f0_phi2": f0_phi2,
        "f0_phi0": f0_phi0,
        "ell_star": ell_star,
        "s0_size": s0_size,
        "lambda0": lambda0,
        "lam": lam,
        "rho_s0_norm": rho_s0_norm,
        "noise_s0_norm": noise_s0_norm,
    }
    return ContractionReport(
        r0=r0,
        lam=lam,
        radii=radii,
        r_infinity=r_infinity,
        contraction=contraction,
        conditions=conditions,
        inputs=inputs,
        suggested_stages=suggested_stage_count(r0, r_initial, r_infinity),
    )

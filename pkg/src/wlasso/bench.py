"""Synthetic data, experiment orchestration, and report serialization.

Every experiment is reproducible from its 64-bit seed: the design and
the true signal come from the root Philox stream, replicate k resamples
the response on substream k, and aggregation is a deterministic fold in
replicate order. Reports serialize to JSON (schema_version "1", floats
at 17 significant digits) or to CSV with one row per replicate.
"""

import csv
import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from functools import partial

import numpy as np

from .analysis import (
    ConeSpec,
    DataSummary,
    bregman_oracle_bound,
    event_xi_check,
    f2_factor,
    glm_gif_lower_bounds,
    invertibility_report,
    irrepresentable_check,
    noise_functionals,
    oracle_bound,
    penalty_level,
    simple_gif,
    src_and_dimension_bound,
)
from .exceptions import DomainError, InfeasibleCalibrationError, IngestionError
from .families import (
    Dataset,
    GlmFamily,
    bregman_divergence,
    evaluate_loss,
    gram_matrix,
    hessian_matrix,
)
from .multistage import MultistageConfig, contraction_report, run_recursion
from .penalties import PenaltySpec, lipschitz_kappa, rho_derivative
from .rng import replicate_rng, root_rng
from .solver import FitConfig, fit_weighted_lasso, solution_path

__all__ = [
    "ExperimentConfig",
    "SimulationResult",
    "generate_synthetic",
    "run_experiment",
    "ingest_csv",
    "write_csv",
    "emit_report",
    "parse_penalty",
]

EXPERIMENTS = (
    "fit",
    "path",
    "multistage",
    "oracle_verify",
    "selection_verify",
    "sparsity_verify",
    "diagnostics",
)

# numerical slack used when checking theoretical inequalities on computed values
_BOUND_RTOL = 1e-9
_BOUND_ATOL = 1e-12


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    family: str = "linear"
    penalty: str = "l1"
    n: int = 100
    p: int = 50
    s0_size: int = 5
    beta_min: float = 1.0
    beta_max: float = 2.0
    design: str = "gaussian_iid"
    standardize: bool = False
    replicates: int = 1
    eps0: float = 0.05
    xi: float = 3.0
    seed: int = 0
    output: str | None = None
    sigma: float = 1.0
    lam: float | str = "auto"
    stages: int = 3
    a_const: float = 2.0
    gamma0: float | None = None
    eta: float = 0.01
    ell_star: int = 4
    alpha: float = 0.5
    d_star: int | None = None
    workers: int = 1
    figures: bool = True
    factor_safety: float = 0.7
    header: bool = False
    enumeration_cap: int = 12

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise DomainError(f"unknown experiment {self.experiment!r}")
        if self.s0_size > self.p:
            raise DomainError("s0_size must not exceed p")
        if self.replicates < 1:
            raise DomainError("replicates must be >= 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def result_config(self) -> dict:
        """Config echo for reports: excludes fields that cannot change the
        records (destination path, figure toggle, worker count)."""
        d = self.to_dict()
        for key in ("output", "figures", "workers"):
            d.pop(key, None)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class SimulationResult:
    experiment: str
    config: dict
    records: list
    aggregates: dict


def make_family(config: ExperimentConfig) -> GlmFamily:
    if config.family == "linear":
        return GlmFamily.linear(sigma2=config.sigma**2)
    if config.family == "logistic":
        return GlmFamily.logistic()
    if config.family == "poisson":
        return GlmFamily.poisson()
    raise DomainError(f"unknown family {config.family!r}")


def parse_penalty(spec: str, lam: float) -> PenaltySpec:
    """Parse 'l1', 'mcp[:gamma]' or 'scad[:a]' into a PenaltySpec at level lam."""
    parts = spec.split(":")
    kind = parts[0]
    if kind == "l1":
        return PenaltySpec.l1(lam)
    if kind == "mcp":
        gamma = float(parts[1]) if len(parts) > 1 else 3.0
        return PenaltySpec.mcp(lam, gamma=gamma)
    if kind == "scad":
        a = float(parts[1]) if len(parts) > 1 else 3.7
        return PenaltySpec.scad(lam, a=a)
    raise DomainError(f"unknown penalty spec {spec!r}")


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------


def _draw_design(config: ExperimentConfig, rng: np.random.Generator) -> np.ndarray:
    n, p = config.n, config.p
    design = config.design
    if design == "identity":
        return np.eye(n, p)
    if design == "gaussian_iid":
        return rng.standard_normal((n, p))
    if design.startswith("gaussian_correlated"):
        rho = float(design.split(":")[1]) if ":" in design else 0.5
        if not -1.0 < rho < 1.0:
            raise DomainError("correlation must lie in (-1, 1)")
        cov = (1.0 - rho) * np.eye(p) + rho * np.ones((p, p))
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise DomainError(
                f"equicorrelation {rho} is not positive definite at p = {p}"
            ) from exc
        return rng.standard_normal((n, p)) @ chol.T
    if design.startswith("from_file"):
        path = design.split(":", 1)[1]
        data = ingest_csv(path, has_header=config.header)
        if data.n != n or data.p != p:
            raise IngestionError(
                f"file {path} has shape ({data.n}, {data.p}), config wants ({n}, {p})"
            )
        return data.x
    raise DomainError(f"unknown design {design!r}")


def _standardize_columns(x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    norms = np.sqrt(np.einsum("ij,ij->j", x, x))
    if np.any(norms == 0):
        raise DomainError("cannot standardize a design with an all-zero column")
    return x * (math.sqrt(n) / norms)[None, :]


def generate_synthetic(config: ExperimentConfig, seed: int) -> tuple[Dataset, np.ndarray]:
    """Draw (design, signal, response) deterministically from the seed.

    The signal has ``s0_size`` nonzeros at the first coordinates with
    magnitudes uniform in [beta_min, beta_max] and random signs.
    """
    rng = root_rng(seed)
    x = _draw_design(config, rng)
    if config.standardize:
        x = _standardize_columns(x)
    beta_star = np.zeros(config.p)
    s0 = config.s0_size
    if s0 > 0:
        signs = rng.integers(0, 2, size=s0) * 2.0 - 1.0
        mags = rng.uniform(config.beta_min, config.beta_max, size=s0)
        beta_star[:s0] = signs * mags
    family = make_family(config)
    y = family.sample_response(rng, x @ beta_star)
    return Dataset.from_arrays(x, y), beta_star


# ---------------------------------------------------------------------------
# calibration helpers
# ---------------------------------------------------------------------------


def _lambda0(config: ExperimentConfig, family: GlmFamily, data: Dataset,
             beta_star) -> float:
    summary = DataSummary.from_dataset(data, family, beta_star=beta_star,
                                       sigma=config.sigma)
    if math.isfinite(family.c0):
        l0, _ = penalty_level(family, summary, config.eps0, "bounded_curvature")
        return l0
    x_inf = np.max(np.abs(data.x), axis=0)
    # the modulus cap relaxes faster in eta0 than the tail tightens, so
    # walk eta0 up until the curvature-free displays become feasible
    last_error = None
    for eta0 in (0.5, 1.0, 2.0, 4.0, 8.0):
        try:
            l0, _ = penalty_level(
                family, summary, config.eps0, "curvature_free",
                eta0=eta0, x_inf_norms=x_inf,
            )
            return l0
        except InfeasibleCalibrationError as exc:
            last_error = exc
    raise last_error


def _resolve_lam(config: ExperimentConfig, lambda0: float) -> float:
    if config.lam == "auto":
        if config.experiment == "multistage":
            kappa = lipschitz_kappa(parse_penalty(config.penalty, 1.0))
            gamma0 = _default_gamma0(config, kappa)
            return config.a_const * lambda0 / (1.0 - kappa * gamma0)
        return lambda0 * (config.xi + 1.0) / (config.xi - 1.0)
    return float(config.lam)


def _default_gamma0(config: ExperimentConfig, kappa: float) -> float:
    if config.gamma0 is not None:
        return config.gamma0
    return 2.0 / (3.0 * kappa) if kappa > 0 else 1.0


def _diag_shortcut(sigma: np.ndarray) -> float | None:
    """c if sigma == c * I within float fuzz, else None."""
    p = sigma.shape[0]
    diag = np.diag(sigma)
    c = float(diag[0])
    if c <= 0:
        return None
    if np.max(np.abs(diag - c)) > 1e-12 * c:
        return None
    off = sigma - np.diag(diag)
    if np.max(np.abs(off)) > 1e-12 * c:
        return None
    return c


def _linear_factors(config, sigma, cone):
    """(f0_phi2, f0_phi1s, certified) for the quadratic loss."""
    c = _diag_shortcut(sigma)
    if c is not None:
        # on c*I every factor in play equals c, by scale equivariance
        return c, c, True
    if sigma.shape[0] <= config.enumeration_cap:
        f2v, cert = simple_gif(sigma, cone, ("phi_q", 2.0),
                               enumeration_cap=config.enumeration_cap,
                               seed=config.seed)
        f1v, _ = simple_gif(sigma, cone, ("phi_1S",),
                            enumeration_cap=config.enumeration_cap,
                            seed=config.seed)
        return f2v, f1v, cert
    f2v, _ = simple_gif(sigma, cone, ("phi_q", 2.0),
                        enumeration_cap=config.enumeration_cap, seed=config.seed)
    f1v, _ = simple_gif(sigma, cone, ("phi_1S",),
                        enumeration_cap=config.enumeration_cap, seed=config.seed)
    return f2v * config.factor_safety, f1v * config.factor_safety, False


def _satisfied(lhs: float, rhs: float) -> bool:
    return lhs <= rhs * (1.0 + _BOUND_RTOL) + _BOUND_ATOL


# ---------------------------------------------------------------------------
# replicate workers (module-level so process pools can pickle them)
# ---------------------------------------------------------------------------


def _resampled(ctx: dict, k: int) -> Dataset:
    rng = replicate_rng(ctx["seed"], k)
    y = ctx["family"].sample_response(rng, ctx["theta_star"])
    return Dataset.from_arrays(ctx["x"], y)


def _errors(h: np.ndarray) -> dict:
    return {
        "err_l1": float(np.sum(np.abs(h))),
        "err_l2": float(np.linalg.norm(h)),
        "err_linf": float(np.max(np.abs(h))),
    }


def _oracle_replicate(ctx: dict, k: int) -> dict:
    data = _resampled(ctx, k)
    family = ctx["family"]
    beta_star = ctx["beta_star"]
    support = ctx["support"]
    lam = ctx["lam"]
    z0, z1 = noise_functionals(data, family, beta_star, support)
    fit = fit_weighted_lasso(data, family, FitConfig(lam=lam))
    h = fit.beta_hat - beta_star
    rec = {"replicate": k, "z0": z0, "z1": z1}
    rec.update(_errors(h))
    rec["bregman"] = bregman_divergence(data, family, fit.beta_hat, beta_star)
    rec["active_size"] = fit.active_size
    rec["kkt_residual"] = fit.kkt_residual

    xi_eff, holds = event_xi_check(1.0, lam, z0, z1)
    noise_event = z0 <= ctx["lambda0"] and z1 <= ctx["lambda1"]
    xi_event = holds(ctx["xi"])
    margin_event = ctx["margin_ok"]
    in_event = bool(noise_event and xi_event and margin_event)
    rec["xi_effective"] = xi_eff
    rec["noise_event"] = noise_event
    rec["xi_event"] = xi_event
    rec["in_event"] = in_event

    eta = ctx["eta_used"]
    if ctx["glm_route"]:
        # phi = m2 |.|_2 route: |h|_2 <= e^eta (lam + z0) / (m2 F*)
        rec["l2_bound"] = math.exp(eta) * (lam + z0) / ctx["l2_factor"]
    else:
        rec["l2_bound"] = oracle_bound(eta, 1.0, lam, z0, len(support), 2.0,
                                       ctx["l2_factor"])
    rec["l2_bound_satisfied"] = _satisfied(rec["err_l2"], rec["l2_bound"])
    if ctx["phi1s_factor"] is not None:
        mask = np.ones(data.p, dtype=bool)
        mask[list(support)] = False
        off_l1 = float(np.sum(np.abs(h[mask])))
        lhs = rec["bregman"] + (lam - z1) * off_l1
        rec["bregman_lhs"] = lhs
        rec["bregman_bound"] = bregman_oracle_bound(
            eta, 1.0, lam, z0, len(support), ctx["phi1s_factor"]
        )
        rec["bregman_bound_satisfied"] = _satisfied(lhs, rec["bregman_bound"])
    rec["violation"] = bool(
        in_event
        and ctx["certified"]
        and not (
            rec["l2_bound_satisfied"]
            and rec.get("bregman_bound_satisfied", True)
        )
    )
    return rec


def _selection_replicate(ctx: dict, k: int) -> dict:
    data = _resampled(ctx, k)
    family = ctx["family"]
    beta_star = ctx["beta_star"]
    support = ctx["support"]
    lam = ctx["lam"]
    z0, z1 = noise_functionals(data, family, beta_star, support)
    fit = fit_weighted_lasso(data, family, FitConfig(lam=lam))
    sign_ok = bool(np.array_equal(np.sign(fit.beta_hat), np.sign(beta_star)))
    no_fp = bool(np.all(fit.beta_hat[ctx["comp_mask"]] == 0.0))
    kappa0, kappa1, m0 = ctx["kappa0"], ctx["kappa1"], ctx["m0"]
    nfp_event = bool(kappa0 < 1.0 and kappa1 * z0 + z1 <= (1.0 - kappa0) * lam)
    beta_min = ctx["beta_min_observed"]
    sign_event = bool(nfp_event and m0 * (lam + z0) < beta_min)
    rec = {
        "replicate": k,
        "z0": z0,
        "z1": z1,
        "sign_recovered": sign_ok,
        "no_false_positive": no_fp,
        "nfp_event": nfp_event,
        "sign_event": sign_event,
        "active_size": fit.active_size,
    }
    rec.update(_errors(fit.beta_hat - beta_star))
    rec["violation"] = bool(
        not ctx["heuristic"]
        and ((nfp_event and not no_fp) or (sign_event and not sign_ok))
    )
    return rec


def _sparsity_replicate(ctx: dict, k: int) -> dict:
    data = _resampled(ctx, k)
    family = ctx["family"]
    beta_star = ctx["beta_star"]
    support = ctx["support"]
    lam = ctx["lam"]
    z0, z1 = noise_functionals(data, family, beta_star, support)
    fit = fit_weighted_lasso(data, family, FitConfig(lam=lam))
    fp = int(np.sum(fit.beta_hat[ctx["comp_mask"]] != 0.0))
    xi_eff, holds = event_xi_check(1.0, lam, z0, z1)
    report = src_and_dimension_bound(
        data, family, beta_star, support,
        ctx["c_lower"], ctx["c_upper"], ctx["d_star"],
        ctx["alpha"], ctx["eta"], verify_src=False, lam=lam,
    )
    in_event = bool(holds(ctx["xi"]) and report.gradient_condition_holds)
    rec = {
        "replicate": k,
        "z0": z0,
        "z1": z1,
        "false_positives": fp,
        "xi_effective": xi_eff,
        "gradient_event": bool(report.gradient_condition_holds),
        "in_event": in_event,
        "d1": report.d1,
        "violation": bool(in_event and fp > report.d1),
        "active_size": fit.active_size,
    }
    rec.update(_errors(fit.beta_hat - beta_star))
    return rec


def _multistage_replicate(ctx: dict, k: int) -> dict:
    data = _resampled(ctx, k)
    family = ctx["family"]
    beta_star = ctx["beta_star"]
    ms_config = MultistageConfig(
        penalty=ctx["penalty"], stages=ctx["stages"], track_target=beta_star
    )
    trace = run_recursion(data, family, ms_config)
    score = -evaluate_loss(data, family, beta_star).gradient
    noise_inf = float(np.max(np.abs(score)))
    noise_s0 = float(np.linalg.norm(score[list(ctx["support"])]))
    report = contraction_report(
        kappa=ctx["kappa"],
        f_star=ctx["f_star"],
        f0_phi2=ctx["f0_phi2"],
        s0_size=len(ctx["support"]),
        eta=ctx["eta"],
        gamma0=ctx["gamma0"],
        a_const=ctx["a_const"],
        lambda0=ctx["lambda0"],
        rho_s0_norm=ctx["rho_s0_norm"],
        noise_s0_norm=noise_s0,
        ell_star=ctx["ell_star"],
        stages=ctx["stages"],
    )
    event = bool(
        noise_inf <= ctx["lambda0"]
        and report.contraction
        and report.conditions["recursive_initial_radius"]
        and report.conditions["recursive_limit_radius"]
    )
    errors = trace.l2_errors()
    radius = report.radii[-1] if report.contraction else math.inf
    all_stages_ok = True
    if event:
        all_stages_ok = all(
            _satisfied(err, rad) for err, rad in zip(errors, report.radii)
        )
    rec = {
        "replicate": k,
        "noise_inf": noise_inf,
        "noise_s0": noise_s0,
        "event": event,
        "r0": report.r0,
        "final_radius": radius,
        "radius_satisfied": all_stages_ok,
        "violation": bool(event and not all_stages_ok),
        "err_stage0": errors[0],
        "err_final": errors[-1],
    }
    for i, e in enumerate(errors):
        rec[f"err_l2_stage{i}"] = e
    for i, r in enumerate(trace.records):
        rec[f"active_stage{i}"] = r.active_set_size
    return rec


def _map_replicates(fn, count: int, workers: int) -> list:
    if workers <= 1:
        return [fn(k) for k in range(count)]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        chunk = max(1, count // (workers * 4))
        return list(ex.map(fn, range(count), chunksize=chunk))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


def _base_context(config: ExperimentConfig):
    data, beta_star = generate_synthetic(config, config.seed)
    family = make_family(config)
    if config.s0_size < 1:
        raise DomainError(f"{config.experiment} needs s0_size >= 1")
    support = tuple(range(config.s0_size))
    lambda0 = _lambda0(config, family, data, beta_star)
    lam = _resolve_lam(config, lambda0)
    return data, beta_star, family, support, lambda0, lam


def _exp_oracle_verify(config: ExperimentConfig) -> SimulationResult:
    data, beta_star, family, support, lambda0, lam = _base_context(config)
    cone = ConeSpec(xi=config.xi, support=support)
    lambda1 = lambda0

    glm_route = family.kind != "linear"
    if not glm_route:
        sigma = gram_matrix(data)
        f0_phi2, f0_phi1s, certified = _linear_factors(config, sigma, cone)
        l2_factor = f0_phi2
        phi1s_factor = f0_phi1s
        eta_used = 0.0
        margin_ok = True
    else:
        row_norms = np.linalg.norm(data.x, axis=1)
        m2 = family.m1 * float(np.max(row_norms)) / math.sqrt(data.n)
        f_star, _, _ = glm_gif_lower_bounds(data, family, beta_star, cone, m2,
                                            seed=config.seed)
        certified = False
        eta_used = config.eta
        # margin condition for the curvature route:
        # lam + lambda0 <= min(xi (lam - lambda1), eta e^-eta F*)
        margin_ok = bool(
            lam + lambda0
            <= min(config.xi * (lam - lambda1),
                   eta_used * math.exp(-eta_used) * f_star)
        )
        l2_factor = m2 * f_star  # phi = m2 |.|_2 bound rearranged for |h|_2
        phi1s_factor = None

    ctx = {
        "seed": config.seed,
        "x": data.x,
        "theta_star": data.x @ beta_star,
        "family": family,
        "beta_star": beta_star,
        "support": support,
        "lam": lam,
        "lambda0": lambda0,
        "lambda1": lambda1,
        "xi": config.xi,
        "eta_used": eta_used,
        "l2_factor": l2_factor,
        "phi1s_factor": phi1s_factor,
        "certified": certified,
        "margin_ok": margin_ok,
        "glm_route": glm_route,
    }
    records = _map_replicates(partial(_oracle_replicate, ctx), config.replicates,
                              config.workers)
    agg = _fold(records)
    agg["lambda"] = lam
    agg["lambda0"] = lambda0
    agg["l2_factor"] = l2_factor
    agg["factor_certified"] = certified
    agg["in_event_count"] = sum(r["in_event"] for r in records)
    agg["violations"] = sum(r["violation"] for r in records)
    agg["noise_event_rate"] = _mean(records, "noise_event")
    return SimulationResult("oracle_verify", config.result_config(), records, agg)


def _exp_selection_verify(config: ExperimentConfig) -> SimulationResult:
    data, beta_star, family, support, lambda0, lam = _base_context(config)
    sel = irrepresentable_check(
        data, family, beta_star, support,
        mode="at_target_only", lam=lam, z0=lambda0, z1=lambda0,
    )
    comp_mask = np.ones(config.p, dtype=bool)
    comp_mask[list(support)] = False
    ctx = {
        "seed": config.seed,
        "x": data.x,
        "theta_star": data.x @ beta_star,
        "family": family,
        "beta_star": beta_star,
        "support": support,
        "comp_mask": comp_mask,
        "lam": lam,
        "kappa0": sel.kappa0,
        "kappa1": sel.kappa1,
        "m0": sel.m0,
        "beta_min_observed": float(np.min(np.abs(beta_star[list(support)]))),
        "heuristic": sel.heuristic,
    }
    records = _map_replicates(partial(_selection_replicate, ctx), config.replicates,
                              config.workers)
    agg = _fold(records)
    agg.update(
        {
            "lambda": lam,
            "lambda0": lambda0,
            "kappa0": sel.kappa0,
            "kappa1": sel.kappa1,
            "m0": sel.m0,
            "predicted_no_false_positive": sel.predicted_no_false_positive,
            "predicted_sign_recovery": sel.predicted_sign_recovery,
            "heuristic": sel.heuristic,
            "sign_recovery_rate": _mean(records, "sign_recovered"),
            "violations": sum(r["violation"] for r in records),
        }
    )
    return SimulationResult("selection_verify", config.result_config(), records, agg)


def _exp_sparsity_verify(config: ExperimentConfig) -> SimulationResult:
    data, beta_star, family, support, lambda0, lam = _base_context(config)
    if config.p > 20:
        raise DomainError("sparsity_verify requires p <= 20 (exhaustive sandwich)")
    d_star = config.d_star if config.d_star is not None else min(
        config.p, config.s0_size + 4
    )
    # observed eigenvalue range over all supersets of size d_star
    probe = src_and_dimension_bound(
        data, family, beta_star, support,
        c_lower=1e-12, c_upper=1e12, d_star=d_star,
        alpha=config.alpha, eta=config.eta, verify_src=True,
    )
    emin, emax = probe.observed_eig_range
    if emin <= 0:
        raise DomainError("on-superset Hessian blocks are singular; increase n")
    c_lower = emin * (1.0 - 1e-9)
    c_upper = emax * (1.0 + 1e-9)
    verified = src_and_dimension_bound(
        data, family, beta_star, support,
        c_lower=c_lower, c_upper=c_upper, d_star=d_star,
        alpha=config.alpha, eta=config.eta, verify_src=True, lam=lam,
    )
    comp_mask = np.ones(config.p, dtype=bool)
    comp_mask[list(support)] = False
    ctx = {
        "seed": config.seed,
        "x": data.x,
        "theta_star": data.x @ beta_star,
        "family": family,
        "beta_star": beta_star,
        "support": support,
        "comp_mask": comp_mask,
        "lam": lam,
        "c_lower": c_lower,
        "c_upper": c_upper,
        "d_star": d_star,
        "alpha": config.alpha,
        "eta": config.eta,
        "xi": config.xi,
    }
    records = _map_replicates(partial(_sparsity_replicate, ctx), config.replicates,
                              config.workers)
    agg = _fold(records)
    agg.update(
        {
            "lambda": lam,
            "lambda0": lambda0,
            "c_lower": c_lower,
            "c_upper": c_upper,
            "d_star": d_star,
            "d1": verified.d1,
            "src_holds": verified.src_holds,
            "src_verified": verified.src_verified,
            "in_event_count": sum(r["in_event"] for r in records),
            "violations": sum(r["violation"] for r in records),
        }
    )
    return SimulationResult("sparsity_verify", config.result_config(), records, agg)


def _exp_multistage(config: ExperimentConfig) -> SimulationResult:
    data, beta_star, family, support, lambda0, lam = _base_context(config)
    penalty = parse_penalty(config.penalty, lam)
    kappa = lipschitz_kappa(penalty)
    gamma0 = _default_gamma0(config, kappa)
    xi = max(config.xi, (config.a_const + 1.0) / (config.a_const - 1.0))
    cone = ConeSpec(xi=xi, support=support)
    sigma = gram_matrix(data) if family.kind == "linear" else hessian_matrix(
        data, family, beta_star
    )
    c = _diag_shortcut(sigma)
    if c is not None:
        f_star, f0_phi2 = c, c
        factors_certified = True
    elif config.p <= config.enumeration_cap:
        f_star = f2_factor(sigma, cone, enumeration_cap=config.enumeration_cap,
                           seed=config.seed)[0]
        f0_phi2 = simple_gif(sigma, cone, ("phi_q", 2.0),
                             enumeration_cap=config.enumeration_cap,
                             seed=config.seed)[0]
        factors_certified = True
    else:
        f_star = f2_factor(sigma, cone, enumeration_cap=config.enumeration_cap,
                           seed=config.seed)[0] * config.factor_safety
        f0_phi2 = simple_gif(sigma, cone, ("phi_q", 2.0),
                             enumeration_cap=config.enumeration_cap,
                             seed=config.seed)[0] * config.factor_safety
        factors_certified = False
    rho_s0 = np.asarray(
        rho_derivative(penalty, np.abs(beta_star[list(support)])), dtype=float
    )
    ctx = {
        "seed": config.seed,
        "x": data.x,
        "theta_star": data.x @ beta_star,
        "family": family,
        "beta_star": beta_star,
        "support": support,
        "penalty": penalty,
        "stages": config.stages,
        "kappa": kappa,
        "gamma0": gamma0,
        "a_const": config.a_const,
        "eta": config.eta,
        "lambda0": lambda0,
        "ell_star": config.ell_star,
        "f_star": f_star,
        "f0_phi2": f0_phi2,
        "rho_s0_norm": float(np.linalg.norm(rho_s0)),
    }
    records = _map_replicates(partial(_multistage_replicate, ctx), config.replicates,
                              config.workers)
    agg = _fold(records)
    med0 = _median(records, "err_stage0")
    medf = _median(records, "err_final")
    agg.update(
        {
            "lambda": lam,
            "lambda0": lambda0,
            "kappa": kappa,
            "gamma0": gamma0,
            "f_star": f_star,
            "f0_phi2": f0_phi2,
            "factors_certified": factors_certified,
            "median_err_stage0": med0,
            "median_err_final": medf,
            "median_error_ratio": medf / med0 if med0 > 0 else math.inf,
            "event_count": sum(r["event"] for r in records),
            "violations": sum(r["violation"] for r in records),
        }
    )
    return SimulationResult("multistage", config.result_config(), records, agg)


def _exp_fit(config: ExperimentConfig) -> SimulationResult:
    data, beta_star, family, support, lambda0, lam = _base_context(config)
    penalty = parse_penalty(config.penalty, lam)
    weights = np.asarray(rho_derivative(penalty, np.zeros(config.p)), dtype=float) / lam
    fit = fit_weighted_lasso(data, family, FitConfig(lam=lam, weights=weights))
    rec = {
        "replicate": 0,
        "lambda": lam,
        "objective": fit.objective,
        "kkt_residual": fit.kkt_residual,
        "converged": fit.converged,
        "active_size": fit.active_size,
        "bregman": bregman_divergence(data, family, fit.beta_hat, beta_star),
    }
    rec.update(_errors(fit.beta_hat - beta_star))
    rec["beta_hat"] = fit.beta_hat.tolist()
    agg = {"count": 1, "lambda": lam, "lambda0": lambda0,
           "active_size": fit.active_size}
    return SimulationResult("fit", config.result_config(), [rec], agg)


def _exp_path(config: ExperimentConfig) -> SimulationResult:
    data, beta_star, family, support, lambda0, _ = _base_context(config)
    grad0 = evaluate_loss(data, family, np.zeros(config.p)).gradient
    lam_max = float(np.max(np.abs(grad0)))
    if lam_max <= 0:
        raise DomainError("null gradient at zero; nothing to fit")
    lambdas = np.geomspace(lam_max, lam_max / 100.0, 20)
    fits = solution_path(data, family, lambdas)
    records = []
    for i, (lam, fit) in enumerate(zip(lambdas, fits)):
        rec = {
            "replicate": i,
            "lambda": float(lam),
            "active_size": fit.active_size,
            "objective": fit.objective,
            "kkt_residual": fit.kkt_residual,
            "converged": fit.converged,
        }
        rec.update(_errors(fit.beta_hat - beta_star))
        rec["beta_hat"] = fit.beta_hat.tolist()
        records.append(rec)
    agg = {"count": len(records), "lambda_max": lam_max, "lambda0": lambda0}
    return SimulationResult("path", config.result_config(), records, agg)


def _exp_diagnostics(config: ExperimentConfig) -> SimulationResult:
    data, beta_star, family, support, lambda0, lam = _base_context(config)
    cone = ConeSpec(xi=config.xi, support=support)
    sigma = gram_matrix(data) if family.kind == "linear" else hessian_matrix(
        data, family, beta_star
    )
    glm = None
    if family.kind != "linear":
        row_norms = np.linalg.norm(data.x, axis=1)
        m2 = family.m1 * float(np.max(row_norms)) / math.sqrt(data.n)
        glm = (data, family, beta_star, m2)
    report = invertibility_report(
        sigma, cone, qs=(2.0,), enumeration_cap=config.enumeration_cap,
        seed=config.seed, glm=glm,
    )
    z0, z1 = noise_functionals(data, family, beta_star, support)
    xi_eff, _ = event_xi_check(1.0, lam, z0, z1)
    sel = irrepresentable_check(
        data, family, beta_star, support, mode="at_target_only",
        lam=lam, z0=lambda0, z1=lambda0,
    )
    rec = {
        "replicate": 0,
        "kappa_star": report.kappa_star,
        "re2": report.re2,
        "f2": report.f2,
        "f0_phi_1S": report.f0_by_phi["phi_1S"],
        "f0_phi_q2": report.f0_by_phi["phi_q:2"],
        "method": report.method,
        "certified": report.certified_lower_bound,
        "f_star_glm": report.f_star_glm,
        "f_lower_glm": report.f_lower_glm,
        "m3": report.m3,
        "z0": z0,
        "z1": z1,
        "xi_effective": xi_eff,
        "lambda": lam,
        "lambda0": lambda0,
        "kappa0": sel.kappa0,
        "kappa1": sel.kappa1,
        "m0": sel.m0,
    }
    agg = {"count": 1, "certified": report.certified_lower_bound}
    return SimulationResult("diagnostics", config.result_config(), [rec], agg)


def run_experiment(config: ExperimentConfig) -> SimulationResult:
    """Run the configured experiment; reproducible from config + seed."""
    dispatch = {
        "fit": _exp_fit,
        "path": _exp_path,
        "multistage": _exp_multistage,
        "oracle_verify": _exp_oracle_verify,
        "selection_verify": _exp_selection_verify,
        "sparsity_verify": _exp_sparsity_verify,
        "diagnostics": _exp_diagnostics,
    }
    return dispatch[config.experiment](config)


# ---------------------------------------------------------------------------
# aggregation
# ---------------------------------------------------------------------------


def _mean(records, key):
    vals = [float(r[key]) for r in records if key in r]
    return sum(vals) / len(vals) if vals else 0.0


def _median(records, key):
    vals = sorted(float(r[key]) for r in records if key in r)
    if not vals:
        return 0.0
    m = len(vals) // 2
    return vals[m] if len(vals) % 2 else 0.5 * (vals[m - 1] + vals[m])


_FOLD_KEYS = ("err_l1", "err_l2", "err_linf", "bregman")


def _fold(records) -> dict:
    agg = {"count": len(records)}
    for key in _FOLD_KEYS:
        if records and key in records[0]:
            agg[f"mean_{key}"] = _mean(records, key)
            agg[f"median_{key}"] = _median(records, key)
    return agg


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _plainify(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _plainify(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plainify(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [_plainify(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [_plainify(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def _json_emit(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _json_emit(obj[k], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _json_emit(v, out)
        out.append("]")
    else:
        raise DomainError(f"cannot serialize value of type {type(obj).__name__}")


def _json_dumps(obj) -> str:
    out = []
    _json_emit(_plainify(obj), out)
    return "".join(out)


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v)
    if isinstance(v, (list, tuple)):
        return ";".join(_csv_cell(x) for x in v)
    return str(v)


def _wrap_report(result) -> SimulationResult:
    if isinstance(result, SimulationResult):
        return result
    payload = _plainify(result)
    name = type(result).__name__
    if isinstance(payload, dict):
        records = [payload]
    elif isinstance(payload, list):
        records = payload
    else:
        records = [{"value": payload}]
    return SimulationResult(name, {}, records, {"count": len(records)})


def emit_report(result, format: str = "json", path: str = "report.json") -> None:
    """Serialize a result to JSON or CSV at ``path``.

    JSON envelope: {schema_version, experiment, config, records,
    aggregates, generated_at}; generated_at is excluded from the
    determinism contract. CSV holds one row per record with a fixed
    column order (sorted union of record keys) and the same
    17-significant-digit float encoding.
    """
    result = _wrap_report(result)
    if format == "json":
        envelope = {
            "schema_version": "1",
            "experiment": result.experiment,
            "config": result.config,
            "records": result.records,
            "aggregates": result.aggregates,
            "generated_at": datetime.now(timezone.utc).isoformat(),
        }
        text = _json_dumps(envelope)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")
        return
    if format != "csv":
        raise DomainError(f"unknown report format {format!r}")
    records = [_plainify(r) for r in result.records]
    columns = sorted({k for r in records for k in r})
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for r in records:
            writer.writerow([_csv_cell(r.get(c)) for c in columns])


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


def ingest_csv(path: str, has_header: bool = False) -> Dataset:
    """Read a dataset: comma-separated, optional header, last column is y."""
    if not os.path.exists(path):
        raise IngestionError(f"no such file: {path}")
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            if i == 0 and has_header:
                continue
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            rows.append((i, row))
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    width = len(rows[0][1])
    if width < 2:
        raise IngestionError(f"{path}: need at least two columns (X then y)")
    values = np.empty((len(rows), width))
    for out_i, (line_no, row) in enumerate(rows):
        if len(row) != width:
            raise IngestionError(
                f"{path}: ragged row at line {line_no + 1} "
                f"({len(row)} cells, expected {width})"
            )
        for j, cell in enumerate(row):
            try:
                values[out_i, j] = float(cell)
            except ValueError as exc:
                raise IngestionError(
                    f"{path}: non-numeric cell at line {line_no + 1}, column {j + 1}: "
                    f"{cell!r}"
                ) from exc
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise IngestionError(
            f"{path}: non-finite value at data row {bad[0] + 1}, column {bad[1] + 1}"
        )
    return Dataset.from_arrays(values[:, :-1], values[:, -1])


def write_csv(data: Dataset, path: str, header: bool = False) -> None:
    """Write a dataset as X columns followed by y (inverse of ingest_csv)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow([f"x{j + 1}" for j in range(data.p)] + ["y"])
        for i in range(data.n):
            writer.writerow(
                [_fmt_float(v) for v in data.x[i]] + [_fmt_float(float(data.y[i]))]
            )

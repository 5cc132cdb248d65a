"""Score-noise functionals and penalty-level calibration.

The two noise functionals split the score z - psi'(beta*) into its
on-support sup-norm and its weighted off-support sup-norm; the penalty
level is calibrated so that both stay below (lambda0, lambda1) with
probability at least 1 - eps0, either from the global curvature bound
c0 (linear, logistic) or from the curvature-free exponential-moment
route that also covers poisson.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..exceptions import DomainError, InfeasibleCalibrationError
from ..families import Dataset, GlmFamily, evaluate_loss
from ..rng import replicate_rng

__all__ = [
    "DataSummary",
    "noise_functionals",
    "penalty_level",
    "monte_carlo_event_probability",
    "event_xi_check",
    "weight_bound_event",
    "oracle_bound",
    "bregman_oracle_bound",
]


@dataclass(frozen=True)
class DataSummary:
    """Design statistics needed by the calibration (no response)."""

    n: int
    p: int
    column_norms: np.ndarray | None = None
    sigma: float = 1.0
    sigma_star_diag: np.ndarray | None = None

    @classmethod
    def from_dataset(cls, data: Dataset, family: GlmFamily, beta_star=None,
                     sigma: float | None = None) -> "DataSummary":
        diag = None
        if beta_star is not None:
            curv = family.psi0_ddot(data.x @ np.asarray(beta_star, dtype=float))
            diag = np.einsum("ij,i,ij->j", data.x, curv, data.x) / data.n
        return cls(
            n=data.n,
            p=data.p,
            column_norms=data.column_norms,
            sigma=family.sigma if sigma is None else sigma,
            sigma_star_diag=diag,
        )


def noise_functionals(data: Dataset, family: GlmFamily, beta_star, support,
                      w_bound=None) -> tuple[float, float]:
    """(z0, z1): on-support and weighted off-support score noise.

    z0 = max_{j in S} |z_j - psi'_j(beta*)|,
    z1 = max_{j not in S} |z_j - psi'_j(beta*)| / w_j (0 when S^c is empty).
    """
    beta_star = np.asarray(beta_star, dtype=float).ravel()
    support = np.asarray(sorted(set(int(j) for j in support)), dtype=int)
    p = data.p
    if support.size == 0:
        raise DomainError("support must be nonempty")
    if np.any(beta_star != 0):
        nz = np.flatnonzero(beta_star)
        if not set(nz.tolist()) <= set(support.tolist()):
            raise DomainError("support must contain every nonzero of beta_star")
    score = -evaluate_loss(data, family, beta_star).gradient  # z - psi'(beta*)
    mask = np.zeros(p, dtype=bool)
    mask[support] = True
    w = np.ones(p) if w_bound is None else np.asarray(w_bound, dtype=float).ravel()
    if np.any(w[~mask] <= 0):
        raise DomainError("w_bound must be positive off the support")
    z0 = float(np.max(np.abs(score[mask])))
    z1 = float(np.max(np.abs(score[~mask]) / w[~mask])) if np.any(~mask) else 0.0
    return z0, z1


def _smallest_root(tail, hi, eps0):
    """Smallest t with tail(t) <= eps0/2; tail must be decreasing in t."""
    target = eps0 / 2.0
    f = lambda t: tail(t) - target
    if f(hi) > 0:
        hi_grow = hi
        for _ in range(200):
            hi_grow *= 2.0
            if f(hi_grow) <= 0:
                break
        else:
            raise InfeasibleCalibrationError(
                "tail-sum display", "tail bound cannot be met at any penalty level"
            )
        hi = hi_grow
    lo = 0.0
    if f(lo) <= 0:
        return 0.0
    return float(brentq(f, lo, hi, xtol=1e-15, rtol=1e-14, maxiter=300))


def penalty_level(family: GlmFamily, summary: DataSummary, eps0: float,
                  mode: str = "bounded_curvature", *, eta0: float | None = None,
                  m1: float | None = None,
                  x_inf_norms=None) -> tuple[float, float]:
    """Smallest symmetric penalty pair (lambda0, lambda1) at confidence 1 - eps0.

    ``bounded_curvature`` uses the union bound with the global curvature
    bound c0 and column norms; with |x_j|_2^2 = n it reduces to
    sigma * sqrt((2 c0 / n) log(2p / eps0)). ``curvature_free`` solves
    the pair of exponential-moment displays and needs eta0, the
    curvature modulus m1 (defaults to the family's), per-column sup
    norms, and the Hessian diagonal in ``summary.sigma_star_diag``.
    """
    if not 0 < eps0 < 1:
        raise DomainError("eps0 must lie in (0, 1)")
    n, p = summary.n, summary.p
    sigma = summary.sigma
    norms = (
        np.full(p, float(n))
        if summary.column_norms is None
        else np.asarray(summary.column_norms, dtype=float)
    )

    if mode == "bounded_curvature":
        c0 = family.c0
        if not math.isfinite(c0):
            raise DomainError(
                "bounded_curvature calibration is unsupported for this family "
                "(unbounded curvature); use curvature_free"
            )

        def tail(t):
            return float(np.sum(np.exp(-(n**2) * t**2 / (2.0 * sigma**2 * c0 * norms))))

        hi = sigma * math.sqrt(2.0 * c0 * float(np.max(norms)) * math.log(2.0 * p / eps0)) / n
        t = _smallest_root(tail, hi, eps0)
        return t, t

    if mode != "curvature_free":
        raise DomainError(f"unknown calibration mode {mode!r}")
    if summary.sigma_star_diag is None:
        raise DomainError("curvature_free calibration needs sigma_star_diag")
    if eta0 is None or not eta0 > 0:
        raise DomainError("curvature_free calibration needs eta0 > 0")
    m1 = family.m1 if m1 is None else float(m1)
    diag = np.asarray(summary.sigma_star_diag, dtype=float)
    if x_inf_norms is None:
        raise DomainError("curvature_free calibration needs x_inf_norms")
    x_inf = np.asarray(x_inf_norms, dtype=float)

    def tail(t):
        return float(np.sum(np.exp(-n * t**2 * math.exp(-eta0) / (2.0 * sigma**2 * diag))))

    hi = sigma * math.sqrt(
        2.0 * float(np.max(diag)) * math.exp(eta0) * math.log(2.0 * p / eps0) / n
    )
    t = _smallest_root(tail, hi, eps0)
    if m1 > 0:
        t_cap = eta0 * math.exp(eta0) / (m1 * float(np.max(x_inf / diag)))
        if t > t_cap:
            raise InfeasibleCalibrationError(
                "curvature-modulus display",
                f"required level {t:.6g} exceeds the modulus cap {t_cap:.6g}; "
                "increase eta0 or the sample size",
            )
    return t, t


def monte_carlo_event_probability(data: Dataset, family: GlmFamily, beta_star,
                                  support, w_bound, lambda0: float, lambda1: float,
                                  replicates: int, seed: int) -> float:
    """Fraction of resampled responses with (z0 <= lambda0, z1 <= lambda1).

    The design stays fixed; replicate k draws its response from the
    family's model at beta_star using substream k.
    """
    if replicates < 1:
        raise DomainError("replicates must be >= 1")
    beta_star = np.asarray(beta_star, dtype=float).ravel()
    theta = data.x @ beta_star
    mean_score = data.x.T @ family.psi0_dot(theta) / data.n
    support = np.asarray(sorted(set(int(j) for j in support)), dtype=int)
    mask = np.zeros(data.p, dtype=bool)
    mask[support] = True
    w = np.ones(data.p) if w_bound is None else np.asarray(w_bound, dtype=float).ravel()
    hits = 0
    for k in range(replicates):
        rng = replicate_rng(seed, k)
        y = family.sample_response(rng, theta)
        score = data.x.T @ y / data.n - mean_score
        z0 = float(np.max(np.abs(score[mask])))
        z1 = float(np.max(np.abs(score[~mask]) / w[~mask])) if np.any(~mask) else 0.0
        if z0 <= lambda0 and z1 <= lambda1:
            hits += 1
    return hits / replicates


def weight_bound_event(w_hat, w_bound, support) -> bool:
    """Whether estimated weights sit inside the deterministic bound.

    The probability statements assume the deterministic vector w brackets
    the (possibly random) fitted weights: w_hat <= w on the support and
    w <= w_hat off it. The solver never checks this itself.
    """
    w_hat = np.asarray(w_hat, dtype=float).ravel()
    w = np.asarray(w_bound, dtype=float).ravel()
    if w_hat.shape != w.shape:
        raise DomainError("weight vectors must share a length")
    mask = np.zeros(w.shape[0], dtype=bool)
    mask[np.asarray(sorted(set(int(j) for j in support)), dtype=int)] = True
    return bool(np.all(w_hat[mask] <= w[mask]) and np.all(w[~mask] <= w_hat[~mask]))


def event_xi_check(w_s_inf: float, lam: float, z0: float, z1: float):
    """Effective cone aperture (w_S_inf lam + z0)/(lam - z1) and its test.

    Returns (xi_effective, predicate); the predicate reports whether a
    given xi dominates the effective one. lam <= z1 means the event
    fails for every finite xi.
    """
    if lam <= z1:
        return math.inf, lambda xi: False
    xi_eff = (w_s_inf * lam + z0) / (lam - z1)
    return xi_eff, lambda xi: xi_eff <= xi


def oracle_bound(eta: float, w_s_inf: float, lam: float, z0: float, s_size: int,
                 q: float, factor: float) -> float:
    """RHS of the l_q error bound: e^eta (w_S_inf lam + z0) |S|^{1/q} / factor."""
    if not factor > 0:
        raise DomainError("factor must be positive")
    if not 0 <= eta <= 1:
        raise DomainError("eta must lie in [0, 1]")
    return math.exp(eta) * (w_s_inf * lam + z0) * s_size ** (1.0 / q) / factor


def bregman_oracle_bound(eta: float, w_s_inf: float, lam: float, z0: float,
                         s_size: int, factor_phi1s: float) -> float:
    """RHS of the divergence bound: e^eta (w_S_inf lam + z0)^2 |S| / F0(phi_1S)."""
    if not factor_phi1s > 0:
        raise DomainError("factor must be positive")
    if not 0 <= eta <= 1:
        raise DomainError("eta must lie in [0, 1]")
    return math.exp(eta) * (w_s_inf * lam + z0) ** 2 * s_size / factor_phi1s

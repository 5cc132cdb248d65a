"""Penalty functions rho_lambda, their derivative slopes, and adaptive weights.

All penalties are normalized so that rho'(0+) = lambda, and rho' is
nonnegative and nonincreasing on t >= 0. The concavity modulus
kappa = sup |rho'(t2)-rho'(t1)| / (t2-t1) controls the multistage
contraction factor. Defaults gamma=3 (mcp) and a=3.7 (scad) are the
standard literature choices.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

__all__ = [
    "PenaltySpec",
    "rho_derivative",
    "rho_value",
    "lipschitz_kappa",
    "weights_from_estimate",
]


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty of kind 'l1', 'mcp' (gamma > 1) or 'scad' (a > 2) at level lam."""

    kind: str
    lam: float
    gamma: float = 3.0
    a: float = 3.7

    def __post_init__(self):
        if self.kind not in ("l1", "mcp", "scad"):
            raise DomainError(f"unknown penalty kind {self.kind!r}")
        if not self.lam > 0:
            raise DomainError("penalty level must be positive")
        if self.kind == "mcp" and not self.gamma > 1:
            raise DomainError("mcp requires gamma > 1")
        if self.kind == "scad" and not self.a > 2:
            raise DomainError("scad requires a > 2")

    @classmethod
    def l1(cls, lam: float) -> "PenaltySpec":
        return cls("l1", lam)

    @classmethod
    def mcp(cls, lam: float, gamma: float = 3.0) -> "PenaltySpec":
        return cls("mcp", lam, gamma=gamma)

    @classmethod
    def scad(cls, lam: float, a: float = 3.7) -> "PenaltySpec":
        return cls("scad", lam, a=a)

    def with_lam(self, lam: float) -> "PenaltySpec":
        return PenaltySpec(self.kind, lam, gamma=self.gamma, a=self.a)


def rho_derivative(spec: PenaltySpec, t) -> np.ndarray | float:
    """rho'(t) for t >= 0 (elementwise on arrays)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("rho_derivative is defined on t >= 0")
    lam = spec.lam
    if spec.kind == "l1":
        out = np.full_like(t_arr, lam)
    elif spec.kind == "mcp":
        out = np.maximum(lam - t_arr / spec.gamma, 0.0)
    else:  # scad
        mid = np.clip((spec.a * lam - t_arr) / (spec.a - 1.0), 0.0, lam)
        out = np.where(t_arr <= lam, lam, np.where(t_arr >= spec.a * lam, 0.0, mid))
    return out if out.ndim else float(out)


def rho_value(spec: PenaltySpec, t) -> np.ndarray | float:
    """rho(t) for t >= 0; used for objective reporting only."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("rho_value is defined on t >= 0")
    lam = spec.lam
    if spec.kind == "l1":
        out = lam * t_arr
    elif spec.kind == "mcp":
        g = spec.gamma
        out = np.where(
            t_arr <= g * lam,
            lam * t_arr - t_arr**2 / (2.0 * g),
            0.5 * g * lam**2,
        )
    else:  # scad
        a = spec.a
        flat = lam**2 * (a + 1.0) / 2.0
        mid = (2.0 * a * lam * t_arr - t_arr**2 - lam**2) / (2.0 * (a - 1.0))
        out = np.where(t_arr <= lam, lam * t_arr, np.where(t_arr >= a * lam, flat, mid))
    return out if out.ndim else float(out)


def lipschitz_kappa(spec: PenaltySpec) -> float:
    """Maximum slope magnitude of rho' (0 for l1, 1/gamma mcp, 1/(a-1) scad)."""
    if spec.kind == "l1":
        return 0.0
    if spec.kind == "mcp":
        return 1.0 / spec.gamma
    return 1.0 / (spec.a - 1.0)


def weights_from_estimate(spec: PenaltySpec, beta_tilde, unpenalized=()) -> np.ndarray:
    """Adaptive weights w_j = rho'(|beta_tilde_j|)/lambda in [0, 1].

    Coordinates in ``unpenalized`` get weight zero. A zero initial
    estimate recovers the unweighted case (all-ones).
    """
    beta_tilde = np.asarray(beta_tilde, dtype=float).ravel()
    if not np.all(np.isfinite(beta_tilde)):
        raise DomainError("initial estimate must be finite")
    w = np.asarray(rho_derivative(spec, np.abs(beta_tilde)), dtype=float) / spec.lam
    for j in unpenalized:
        w[j] = 0.0
    return w

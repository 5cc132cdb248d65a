"""Convex GLM losses ell(beta) = psi(beta) - <beta, z> and their derivatives.

Three canonical-link families are supported:

* ``linear``   psi0(t) = t^2/2        (Gaussian response)
* ``logistic`` psi0(t) = log(1+e^t)   (Bernoulli response)
* ``poisson``  psi0(t) = e^t          (count response, log link)

Each family carries the smoothness constants used by the diagnostics:
``m1`` bounds the log-Lipschitz modulus of the curvature psi0'', ``c0``
is sup_t psi0''(t) (infinite for poisson), and ``sigma2`` is the
dispersion entering penalty calibration (never the loss itself).

Additive data-only terms of the log-likelihood are dropped throughout;
they cancel in every divergence and optimality condition.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .exceptions import DomainError, LinearPredictorOverflow

__all__ = [
    "Dataset",
    "GlmFamily",
    "LossEvaluation",
    "evaluate_loss",
    "bregman_divergence",
    "gradient_check",
    "gram_matrix",
    "hessian_matrix",
]

# exp() overflows double precision near 709.78; fail a little earlier.
_EXP_GUARD = 700.0


@dataclass(frozen=True)
class Dataset:
    """An n x p design matrix with its response vector.

    ``column_norms[j]`` caches |x_j|_2^2 (sum of squares of column j).
    Use :meth:`from_arrays` to construct with validation.
    """

    x: np.ndarray
    y: np.ndarray
    column_norms: np.ndarray

    @classmethod
    def from_arrays(cls, x, y, column_norms=None) -> "Dataset":
        x = np.ascontiguousarray(np.asarray(x, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if x.ndim != 2:
            raise DomainError("design matrix must be two-dimensional")
        n, p = x.shape
        if n < 1 or p < 1:
            raise DomainError(f"need n >= 1 and p >= 1, got shape {x.shape}")
        if y.shape[0] != n:
            raise DomainError(f"response length {y.shape[0]} != n = {n}")
        if not np.all(np.isfinite(x)):
            raise DomainError("design matrix contains non-finite entries")
        if not np.all(np.isfinite(y)):
            raise DomainError("response contains non-finite entries")
        norms = np.einsum("ij,ij->j", x, x)
        if column_norms is not None:
            column_norms = np.asarray(column_norms, dtype=float).ravel()
            scale = np.maximum(norms, 1.0)
            if column_norms.shape[0] != p or np.any(
                np.abs(column_norms - norms) > 1e-12 * scale
            ):
                raise DomainError("column_norms inconsistent with the design matrix")
            norms = column_norms
        return cls(x=x, y=y, column_norms=norms)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def score_vector(self) -> np.ndarray:
        """z = X'y/n, the linear part of the loss."""
        return self.x.T @ self.y / self.n


@dataclass(frozen=True)
class GlmFamily:
    """Tagged GLM family with its cumulant function and constants."""

    kind: str
    sigma2: float = 1.0

    _CONSTANTS = {
        # kind: (m1, eta_star, c0)
        "linear": (0.0, np.inf, 1.0),
        "logistic": (1.0, np.inf, 0.25),
        "poisson": (1.0, np.inf, np.inf),
    }

    def __post_init__(self):
        if self.kind not in self._CONSTANTS:
            raise DomainError(f"unknown family kind {self.kind!r}")
        if not self.sigma2 > 0:
            raise DomainError("sigma2 must be positive")

    @classmethod
    def linear(cls, sigma2: float = 1.0) -> "GlmFamily":
        return cls("linear", sigma2)

    @classmethod
    def logistic(cls) -> "GlmFamily":
        return cls("logistic", 1.0)

    @classmethod
    def poisson(cls) -> "GlmFamily":
        return cls("poisson", 1.0)

    @property
    def m1(self) -> float:
        """Log-Lipschitz constant of psi0'' (0 for the quadratic loss)."""
        return self._CONSTANTS[self.kind][0]

    @property
    def eta_star(self) -> float:
        return self._CONSTANTS[self.kind][1]

    @property
    def c0(self) -> float:
        """sup_t psi0''(t); infinite for poisson."""
        return self._CONSTANTS[self.kind][2]

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))

    # -- cumulant function and derivatives ---------------------------------

    def psi0(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.kind == "linear":
            return 0.5 * theta**2
        if self.kind == "logistic":
            return np.logaddexp(0.0, theta)
        self._guard(theta)
        return np.exp(theta)

    def psi0_dot(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.kind == "linear":
            return theta
        if self.kind == "logistic":
            return expit(theta)
        self._guard(theta)
        return np.exp(theta)

    def psi0_ddot(self, theta: np.ndarray) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.kind == "linear":
            return np.ones_like(theta)
        if self.kind == "logistic":
            return expit(theta) * expit(-theta)
        self._guard(theta)
        return np.exp(theta)

    def _guard(self, theta: np.ndarray) -> None:
        bad = theta > _EXP_GUARD
        if np.any(bad):
            row = int(np.argmax(bad))
            raise LinearPredictorOverflow(row=row, value=float(np.asarray(theta)[row]))

    # -- response handling --------------------------------------------------

    def validate_response(self, y: np.ndarray) -> None:
        if self.kind == "logistic":
            if not np.all((y == 0.0) | (y == 1.0)):
                raise DomainError("logistic family requires y_i in {0, 1}")
        elif self.kind == "poisson":
            if np.any(y < 0):
                raise DomainError("poisson family requires y_i >= 0")

    def sample_response(self, rng: np.random.Generator, theta: np.ndarray) -> np.ndarray:
        """Draw y from the family's model at linear predictor theta."""
        if self.kind == "linear":
            return theta + self.sigma * rng.standard_normal(theta.shape)
        if self.kind == "logistic":
            return (rng.random(theta.shape) < expit(theta)).astype(float)
        self._guard(theta)
        return rng.poisson(np.exp(theta)).astype(float)


@dataclass(frozen=True)
class LossEvaluation:
    """Loss value with gradient and per-observation curvature weights."""

    value: float
    gradient: np.ndarray
    linear_predictor: np.ndarray
    curvature: np.ndarray


def evaluate_loss(data: Dataset, family: GlmFamily, beta: np.ndarray) -> LossEvaluation:
    """Evaluate ell(beta) = mean_i psi0(x^i beta) - (X'y/n)' beta.

    Returns the value, the gradient X'(psi0'(theta) - y)/n, the linear
    predictor theta = X beta, and the curvature weights psi0''(theta_i).
    Raises :class:`LinearPredictorOverflow` if a poisson predictor
    exceeds the exp() guard.
    """
    beta = np.asarray(beta, dtype=float).ravel()
    if beta.shape[0] != data.p:
        raise DomainError(f"beta length {beta.shape[0]} != p = {data.p}")
    if not np.all(np.isfinite(beta)):
        raise DomainError("beta contains non-finite entries")
    family.validate_response(data.y)

    n = data.n
    theta = data.x @ beta
    value = float(np.sum(family.psi0(theta)) / n - data.score_vector @ beta)
    gradient = data.x.T @ (family.psi0_dot(theta) - data.y) / n
    curvature = family.psi0_ddot(theta)
    return LossEvaluation(
        value=value, gradient=gradient, linear_predictor=theta, curvature=curvature
    )


def bregman_divergence(data: Dataset, family: GlmFamily, beta, beta_star) -> float:
    """Symmetrized Bregman divergence <beta-beta*, psi'(beta)-psi'(beta*)>.

    Nonnegative by convexity; equals |X(beta-beta*)|_2^2 / n for the
    linear family and the symmetrized KL divergence for the others.
    """
    beta = np.asarray(beta, dtype=float).ravel()
    beta_star = np.asarray(beta_star, dtype=float).ravel()
    if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(beta_star))):
        raise DomainError("inputs must be finite")
    theta = data.x @ beta
    theta_star = data.x @ beta_star
    # <h, X'(d)/n> = <Xh, d>/n: cheaper and avoids forming psi'(beta) in R^p.
    diff = family.psi0_dot(theta) - family.psi0_dot(theta_star)
    return float((theta - theta_star) @ diff / data.n)


def gradient_check(data: Dataset, family: GlmFamily, beta, step: float) -> float:
    """Max relative error of the analytic gradient vs central differences.

    The relative error at coordinate j is |g_j - fd_j| / max(1, |g_j|).
    """
    if not step > 0:
        raise DomainError("step must be positive")
    beta = np.asarray(beta, dtype=float).ravel()
    analytic = evaluate_loss(data, family, beta).gradient
    worst = 0.0
    for j in range(beta.shape[0]):
        bp = beta.copy()
        bm = beta.copy()
        bp[j] += step
        bm[j] -= step
        fd = (
            evaluate_loss(data, family, bp).value
            - evaluate_loss(data, family, bm).value
        ) / (2.0 * step)
        worst = max(worst, abs(analytic[j] - fd) / max(1.0, abs(analytic[j])))
    return worst


def gram_matrix(data: Dataset) -> np.ndarray:
    """X'X/n, the Hessian of the quadratic loss."""
    return data.x.T @ data.x / data.n


def hessian_matrix(data: Dataset, family: GlmFamily, beta) -> np.ndarray:
    """X' diag(psi0''(X beta)) X / n at the given point."""
    beta = np.asarray(beta, dtype=float).ravel()
    curv = family.psi0_ddot(data.x @ beta)
    return (data.x * curv[:, None]).T @ data.x / data.n

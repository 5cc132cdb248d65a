"""Uniform eigenvalue sandwich over support supersets and the dimension cap.

With c_lower <= eigs(Hessian_A(beta*)) <= c_upper over every A containing
S of size d_star, the number of false positives of the unweighted fit is
capped by d1 = floor(|S| / (2(1-alpha)) * (e^{2 eta} c_upper/c_lower - 1))
whenever the score event holds. The sandwich itself can be verified
exhaustively at small p.
"""

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..exceptions import DomainError
from ..families import Dataset, GlmFamily, evaluate_loss, hessian_matrix

__all__ = ["SparsityReport", "default_d_star", "src_and_dimension_bound"]


@dataclass(frozen=True)
class SparsityReport:
    c_lower: float
    c_upper: float
    d_star: int
    alpha: float
    eta: float
    d1: int
    src_holds: bool
    src_verified: bool | None = None
    observed_eig_range: tuple | None = None
    gradient_condition_holds: bool | None = None
    gradient_norm_max: float | None = None
    gradient_threshold: float | None = None
    lam: float | None = None

    def lambda_xi(self, xi: float) -> float:
        """Reduced level (xi - 1) lam / (xi + 1) used by the score event."""
        if self.lam is None:
            raise DomainError("no penalty level stored on this report")
        return (xi - 1.0) * self.lam / (xi + 1.0)


def _d1_value(s_size: int, alpha: float, eta: float, c_lower: float,
              c_upper: float, p: int) -> int:
    if alpha >= 1.0:
        return p - s_size  # vacuous cap in the alpha -> 1 limit
    return int(
        math.floor(
            s_size / (2.0 * (1.0 - alpha)) * (math.exp(2.0 * eta) * c_upper / c_lower - 1.0)
        )
    )


def default_d_star(s_size: int, c_lower: float, c_upper: float, alpha: float,
                   eta: float) -> int:
    """Smallest superset size satisfying the sandwich cardinality display."""
    if alpha >= 1.0:
        raise DomainError("default d_star needs alpha < 1")
    need = s_size / (2.0 * (1.0 - alpha)) * (
        math.exp(2.0 * eta) * c_upper / c_lower + 1.0 - alpha
    )
    return max(s_size, int(math.ceil(need)))


def src_and_dimension_bound(data: Dataset, family: GlmFamily, beta_star, support,
                            c_lower: float, c_upper: float, d_star: int,
                            alpha: float, eta: float, verify_src: bool = False,
                            lam: float | None = None,
                            enumeration_cap: int = 1_000_000) -> SparsityReport:
    """Check the eigenvalue sandwich and compute the false-positive cap d1.

    ``verify_src`` exhaustively checks the sandwich for all A containing
    S with |A| = d_star (p <= 20 only, and at most ``enumeration_cap``
    subsets). When ``lam`` is given, the score condition
    max_{A : S ⊆ A, |A| <= d1} |Hessian_A^(-1/2) grad_A(beta*)|_2
    <= e^{-eta} alpha lam sqrt((d1-|S|)/c_upper) is evaluated as well.
    """
    if not (0 < alpha <= 1):
        raise DomainError("alpha must lie in (0, 1]")
    if not (0 < eta <= 1):
        raise DomainError("eta must lie in (0, 1]")
    if not (c_upper >= c_lower > 0):
        raise DomainError("need c_upper >= c_lower > 0")
    support_arr = np.asarray(sorted(set(int(j) for j in support)), dtype=int)
    s_size = support_arr.size
    p = data.p
    if not (s_size <= d_star <= p):
        raise DomainError("need |S| <= d_star <= p")

    d1 = _d1_value(s_size, alpha, eta, c_lower, c_upper, p)
    if alpha >= 1.0:
        src_holds = False
    else:
        src_holds = (
            s_size / (2.0 * (1.0 - alpha))
            * (math.exp(2.0 * eta) * c_upper / c_lower + 1.0 - alpha)
            <= d_star
        )

    sigma_star = hessian_matrix(data, family, beta_star)

    src_verified = None
    observed = None
    if verify_src:
        if p > 20:
            raise DomainError("exhaustive sandwich verification is limited to p <= 20")
        extra = d_star - s_size
        others = [j for j in range(p) if j not in set(support_arr.tolist())]
        count = math.comb(len(others), extra)
        if count > enumeration_cap:
            raise DomainError(
                f"sandwich verification needs {count} subsets, above the cap "
                f"{enumeration_cap}"
            )
        emin, emax = math.inf, -math.inf
        for extra_set in combinations(others, extra):
            idx = np.concatenate([support_arr, np.asarray(extra_set, dtype=int)])
            eigs = np.linalg.eigvalsh(sigma_star[np.ix_(idx, idx)])
            emin = min(emin, float(eigs[0]))
            emax = max(emax, float(eigs[-1]))
        observed = (emin, emax)
        slack = 1e-10 * max(1.0, abs(emax))
        src_verified = bool(emin >= c_lower - slack and emax <= c_upper + slack)

    gradient_ok = None
    gnorm_max = None
    threshold = None
    if lam is not None:
        grad = evaluate_loss(data, family, beta_star).gradient
        if d1 <= s_size:
            gradient_ok = False
        else:
            threshold = (
                math.exp(-eta) * alpha * lam * math.sqrt((d1 - s_size) / c_upper)
            )
            others = [j for j in range(p) if j not in set(support_arr.tolist())]
            gnorm_max = 0.0
            budget = enumeration_cap
            for extra in range(0, d1 - s_size + 1):
                for extra_set in combinations(others, extra):
                    budget -= 1
                    if budget < 0:
                        raise DomainError(
                            "score-condition enumeration exceeds the subset cap"
                        )
                    idx = np.concatenate(
                        [support_arr, np.asarray(extra_set, dtype=int)]
                    )
                    block = sigma_star[np.ix_(idx, idx)]
                    v = grad[idx]
                    try:
                        val = float(v @ np.linalg.solve(block, v))
                    except np.linalg.LinAlgError:
                        val = math.inf
                    gnorm_max = max(gnorm_max, math.sqrt(max(val, 0.0)))
            gradient_ok = bool(gnorm_max <= threshold)

    return SparsityReport(
        c_lower=c_lower,
        c_upper=c_upper,
        d_star=d_star,
        alpha=alpha,
        eta=eta,
        d1=d1,
        src_holds=bool(src_holds),
        src_verified=src_verified,
        observed_eig_range=observed,
        gradient_condition_holds=gradient_ok,
        gradient_norm_max=gnorm_max,
        gradient_threshold=threshold,
        lam=lam,
    )

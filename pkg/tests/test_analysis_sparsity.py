import math

import numpy as np
import pytest

from wlasso import Dataset, GlmFamily
from wlasso.analysis import default_d_star, src_and_dimension_bound
from wlasso.exceptions import DomainError


def _linear_data(rng, n, p):
    x = rng.standard_normal((n, p))
    x *= math.sqrt(n) / np.linalg.norm(x, axis=0)
    beta_star = np.zeros(p)
    beta_star[:2] = [1.5, -1.2]
    y = x @ beta_star + rng.standard_normal(n)
    return Dataset.from_arrays(x, y), beta_star


def test_d1_arithmetic_example():
    # e^{2 eta} c_upper / c_lower == 2 with |S| = 2, alpha = 1/2 gives d1 = 2
    rng = np.random.default_rng(80)
    data, beta_star = _linear_data(rng, 60, 8)
    eta = 0.1
    c_upper = 2.0 * math.exp(-2.0 * eta)
    rep = src_and_dimension_bound(
        data, GlmFamily.linear(), beta_star, (0, 1),
        c_lower=1.0, c_upper=c_upper, d_star=6, alpha=0.5, eta=eta,
    )
    assert rep.d1 == 2
    # cardinality display: 2/(2*0.5) * (2 + 1 - 0.5) = 5 <= 6
    assert rep.src_holds


def test_identity_sandwich_verifies():
    n = 12
    x = np.eye(n) * math.sqrt(n)
    data = Dataset.from_arrays(x, np.zeros(n))
    beta_star = np.zeros(n)
    beta_star[:2] = 1.0
    rep = src_and_dimension_bound(
        data, GlmFamily.linear(), beta_star, (0, 1),
        c_lower=1.0 - 1e-9, c_upper=1.0 + 1e-9, d_star=5, alpha=0.5, eta=0.1,
        verify_src=True,
    )
    assert rep.src_verified
    lo, hi = rep.observed_eig_range
    assert lo == pytest.approx(1.0, rel=1e-12)
    assert hi == pytest.approx(1.0, rel=1e-12)


def test_combinatorial_refusal_counts_subsets():
    rng = np.random.default_rng(81)
    data, beta_star = _linear_data(rng, 40, 20)
    with pytest.raises(DomainError) as exc:
        src_and_dimension_bound(
            data, GlmFamily.linear(), beta_star, (0, 1),
            c_lower=0.5, c_upper=2.0, d_star=11, alpha=0.5, eta=0.1,
            verify_src=True, enumeration_cap=1000,
        )
    assert "48620" in str(exc.value)  # C(18, 9)


def test_p_above_20_refused_for_verification():
    rng = np.random.default_rng(82)
    data, beta_star = _linear_data(rng, 50, 25)
    with pytest.raises(DomainError):
        src_and_dimension_bound(
            data, GlmFamily.linear(), beta_star, (0, 1),
            c_lower=0.5, c_upper=2.0, d_star=4, alpha=0.5, eta=0.1,
            verify_src=True,
        )


def test_gradient_condition_evaluated_with_lambda():
    rng = np.random.default_rng(83)
    data, beta_star = _linear_data(rng, 80, 10)
    rep = src_and_dimension_bound(
        data, GlmFamily.linear(), beta_star, (0, 1),
        c_lower=0.5, c_upper=2.0, d_star=6, alpha=0.5, eta=0.1, lam=0.8,
    )
    assert rep.gradient_condition_holds is not None
    assert rep.gradient_norm_max is not None
    assert rep.gradient_threshold == pytest.approx(
        math.exp(-0.1) * 0.5 * 0.8 * math.sqrt((rep.d1 - 2) / 2.0)
    )
    # without lam the condition is not evaluated
    rep2 = src_and_dimension_bound(
        data, GlmFamily.linear(), beta_star, (0, 1),
        c_lower=0.5, c_upper=2.0, d_star=6, alpha=0.5, eta=0.1,
    )
    assert rep2.gradient_condition_holds is None


def test_gradient_condition_vacuous_when_d1_small():
    rng = np.random.default_rng(84)
    data, beta_star = _linear_data(rng, 60, 8)
    rep = src_and_dimension_bound(
        data, GlmFamily.linear(), beta_star, (0, 1),
        c_lower=1.0, c_upper=1.0 + 1e-6, d_star=4, alpha=0.5, eta=1e-4, lam=0.5,
    )
    assert rep.d1 <= 2
    assert rep.gradient_condition_holds is False


def test_default_d_star_is_smallest_feasible():
    c_lower, c_upper, alpha, eta = 1.0, 2.0, 0.5, 0.1
    d = default_d_star(2, c_lower, c_upper, alpha, eta)
    need = 2 / (2 * (1 - alpha)) * (math.exp(2 * eta) * c_upper / c_lower + 1 - alpha)
    assert d - 1 < need <= d


def test_lambda_xi_helper():
    rng = np.random.default_rng(85)
    data, beta_star = _linear_data(rng, 40, 6)
    rep = src_and_dimension_bound(
        data, GlmFamily.linear(), beta_star, (0, 1),
        c_lower=0.5, c_upper=2.0, d_star=4, alpha=0.5, eta=0.1, lam=0.9,
    )
    assert rep.lambda_xi(3.0) == pytest.approx(0.45)
    rep_unset = src_and_dimension_bound(
        data, GlmFamily.linear(), beta_star, (0, 1),
        c_lower=0.5, c_upper=2.0, d_star=4, alpha=0.5, eta=0.1,
    )
    with pytest.raises(DomainError):
        rep_unset.lambda_xi(3.0)


def test_parameter_validation():
    rng = np.random.default_rng(86)
    data, beta_star = _linear_data(rng, 40, 6)
    fam = GlmFamily.linear()
    with pytest.raises(DomainError):
        src_and_dimension_bound(data, fam, beta_star, (0, 1), 1.0, 2.0, 4, 0.0, 0.1)
    with pytest.raises(DomainError):
        src_and_dimension_bound(data, fam, beta_star, (0, 1), 1.0, 2.0, 4, 0.5, 1.5)
    with pytest.raises(DomainError):
        src_and_dimension_bound(data, fam, beta_star, (0, 1), 2.0, 1.0, 4, 0.5, 0.1)
    with pytest.raises(DomainError):
        src_and_dimension_bound(data, fam, beta_star, (0, 1), 1.0, 2.0, 1, 0.5, 0.1)

import math

import numpy as np
import pytest

from wlasso import Dataset, GlmFamily
from wlasso.analysis import irrepresentable_check
from wlasso.exceptions import DomainError, SingularHessianError
from scipy.special import expit


def test_identity_design_blocks():
    n = 8
    x = np.eye(n) * math.sqrt(n)
    data = Dataset.from_arrays(x, np.zeros(n))
    beta_star = np.zeros(n)
    beta_star[:2] = [1.0, -1.0]
    rep = irrepresentable_check(data, GlmFamily.linear(), beta_star, (0, 1))
    assert rep.kappa0 == 0.0
    assert rep.kappa1 == 0.0
    assert rep.m0 == pytest.approx(1.0, rel=1e-12)
    assert not rep.heuristic
    assert rep.predicted_no_false_positive is None  # thresholds not supplied


def test_identity_predictions_with_thresholds():
    n = 8
    x = np.eye(n) * math.sqrt(n)
    data = Dataset.from_arrays(x, np.zeros(n))
    beta_star = np.zeros(n)
    beta_star[:2] = [2.0, -2.0]
    rep = irrepresentable_check(
        data, GlmFamily.linear(), beta_star, (0, 1), lam=0.5, z0=0.25, z1=0.25
    )
    assert rep.predicted_no_false_positive  # 0*z0 + z1 <= lam
    assert rep.beta_min_threshold == pytest.approx(0.75)
    assert rep.predicted_sign_recovery  # 0.75 < 2.0
    weak = beta_star * 0.3
    rep = irrepresentable_check(
        data, GlmFamily.linear(), weak, (0, 1), lam=0.5, z0=0.25, z1=0.25
    )
    assert not rep.predicted_sign_recovery  # threshold 0.75 >= 0.6


def test_correlated_linear_kappas_match_formula():
    rho = 0.4
    p, n = 4, 400
    cov = (1 - rho) * np.eye(p) + rho * np.ones((p, p))
    rng = np.random.default_rng(70)
    x = rng.standard_normal((n, p)) @ np.linalg.cholesky(cov).T
    data = Dataset.from_arrays(x, np.zeros(n))
    beta_star = np.zeros(p)
    beta_star[:2] = 1.0
    rep = irrepresentable_check(data, GlmFamily.linear(), beta_star, (0, 1))
    sigma = x.T @ x / n
    inv = np.linalg.inv(sigma[:2, :2])
    cross = sigma[2:, :2] @ inv
    assert rep.kappa0 == pytest.approx(np.max(np.sum(np.abs(cross), axis=1)),
                                       rel=1e-12)
    assert rep.m0 == pytest.approx(np.max(np.sum(np.abs(inv), axis=1)), rel=1e-12)


def test_singular_support_block_raises():
    x = np.ones((6, 3))
    x[:, 1] = x[:, 0]  # duplicate support columns
    data = Dataset.from_arrays(x, np.zeros(6))
    with pytest.raises(SingularHessianError):
        irrepresentable_check(data, GlmFamily.linear(), np.array([1.0, 1.0, 0.0]),
                              (0, 1))


def test_logistic_sampled_ball_below_dense_grid():
    rng = np.random.default_rng(71)
    n, p = 50, 4
    x = rng.standard_normal((n, p))
    beta_star = np.zeros(p)
    beta_star[:2] = [0.8, -0.6]
    y = (rng.random(n) < expit(x @ beta_star)).astype(float)
    data = Dataset.from_arrays(x, y)
    fam = GlmFamily.logistic()
    eta = 0.2
    m2 = fam.m1 * float(np.max(np.linalg.norm(x, axis=1))) / math.sqrt(n)
    rep = irrepresentable_check(
        data, fam, beta_star, (0, 1), eta_ball=eta, mode="sampled_ball",
        sample_count=96, seed=5, m2=m2,
    )
    assert rep.heuristic
    assert rep.sample_count == 96

    # independent dense-grid supremum of the same functional over the ball
    radius = eta / m2
    grid_rng = np.random.default_rng(99)
    kappa0_grid = 0.0
    for _ in range(4096):
        d = grid_rng.standard_normal(p)
        d *= radius * grid_rng.uniform() ** (1 / p) / np.linalg.norm(d)
        point = beta_star + d
        mu = expit(x @ point)
        h = (x * (mu * (1 - mu))[:, None]).T @ x / n
        cross = h[2:, :2] @ np.linalg.inv(h[:2, :2])
        kappa0_grid = max(kappa0_grid, float(np.max(np.sum(np.abs(cross), axis=1))))
    assert rep.kappa0 <= kappa0_grid + 1e-3


def test_at_target_logistic_flagged_heuristic():
    rng = np.random.default_rng(72)
    x = rng.standard_normal((30, 3))
    y = (rng.random(30) < 0.5).astype(float)
    data = Dataset.from_arrays(x, y)
    rep = irrepresentable_check(data, GlmFamily.logistic(), np.zeros(3), (0,))
    assert rep.heuristic
    assert rep.evaluation_mode == "at_target_only"


def test_weight_bound_validation():
    data = Dataset.from_arrays(np.eye(3), np.zeros(3))
    with pytest.raises(DomainError):
        irrepresentable_check(data, GlmFamily.linear(), np.array([1.0, 0, 0]), (0,),
                              w_bound=np.array([1.0, 0.0, 1.0]))
    with pytest.raises(DomainError):
        irrepresentable_check(data, GlmFamily.linear(), np.array([1.0, 0, 0]), (0,),
                              mode="nonsense")

import numpy as np
import pytest

from wlasso import PenaltySpec, lipschitz_kappa, rho_derivative, rho_value, weights_from_estimate
from wlasso.exceptions import DomainError


def test_l1_derivative_constant():
    spec = PenaltySpec.l1(0.7)
    ts = np.linspace(0.0, 10.0, 11)
    np.testing.assert_allclose(rho_derivative(spec, ts), 0.7)


def test_mcp_derivative_values():
    spec = PenaltySpec.mcp(1.0, gamma=3.0)
    assert rho_derivative(spec, 1.5) == pytest.approx(0.5)
    assert rho_derivative(spec, 3.0) == 0.0
    assert rho_derivative(spec, 7.0) == 0.0
    assert rho_derivative(spec, 0.0) == 1.0


def test_scad_derivative_values():
    spec = PenaltySpec.scad(1.0, a=3.7)
    assert rho_derivative(spec, 0.5) == 1.0
    assert rho_derivative(spec, 1.0) == 1.0
    assert rho_derivative(spec, 2.0) == pytest.approx((3.7 - 2.0) / 2.7)
    assert rho_derivative(spec, 3.7) == 0.0
    assert rho_derivative(spec, 5.0) == 0.0


def test_negative_argument_rejected():
    with pytest.raises(DomainError):
        rho_derivative(PenaltySpec.l1(1.0), -0.1)
    with pytest.raises(DomainError):
        rho_value(PenaltySpec.l1(1.0), -0.1)


def test_lipschitz_kappa_values():
    assert lipschitz_kappa(PenaltySpec.l1(1.0)) == 0.0
    assert lipschitz_kappa(PenaltySpec.mcp(1.0, gamma=3.0)) == pytest.approx(1 / 3)
    assert lipschitz_kappa(PenaltySpec.scad(1.0, a=3.7)) == pytest.approx(1 / 2.7)


@pytest.mark.parametrize(
    "spec",
    [PenaltySpec.l1(0.8), PenaltySpec.mcp(0.8, gamma=2.5), PenaltySpec.scad(0.8, a=3.7)],
)
def test_lipschitz_bound_holds_and_is_attained(spec):
    kappa = lipschitz_kappa(spec)
    grid = np.linspace(0.0, 5.0 * spec.lam, 400)
    d = np.asarray(rho_derivative(spec, grid))
    best = 0.0
    for i in range(len(grid)):
        diffs = np.abs(d[i + 1 :] - d[i])
        gaps = grid[i + 1 :] - grid[i]
        assert np.all(diffs <= kappa * gaps + 1e-12)
        if len(gaps):
            best = max(best, float(np.max(diffs / gaps)))
    if spec.kind != "l1":
        assert best == pytest.approx(kappa, rel=1e-6)


def test_derivative_nonincreasing_and_nonnegative():
    for spec in (PenaltySpec.l1(1.2), PenaltySpec.mcp(1.2), PenaltySpec.scad(1.2)):
        grid = np.linspace(0.0, 6.0, 200)
        d = np.asarray(rho_derivative(spec, grid))
        assert np.all(d >= 0.0)
        assert np.all(np.diff(d) <= 1e-12)


def test_weights_zero_estimate_gives_ones():
    for spec in (PenaltySpec.l1(2.0), PenaltySpec.mcp(2.0), PenaltySpec.scad(2.0)):
        w = weights_from_estimate(spec, np.zeros(4))
        np.testing.assert_allclose(w, 1.0)


def test_weights_examples_and_range():
    spec = PenaltySpec.mcp(1.0, gamma=3.0)
    w = weights_from_estimate(spec, [1.5, -1.5, 0.0, 9.0])
    np.testing.assert_allclose(w, [0.5, 0.5, 1.0, 0.0])
    spec = PenaltySpec.l1(1.0)
    np.testing.assert_allclose(weights_from_estimate(spec, [3.0, -2.0]), 1.0)


def test_weights_unpenalized_and_monotone():
    spec = PenaltySpec.scad(1.5, a=3.7)
    w = weights_from_estimate(spec, [0.3, 0.3], unpenalized=(1,))
    assert w[1] == 0.0 and w[0] > 0.0
    mags = np.linspace(0.0, 8.0, 50)
    w = weights_from_estimate(spec, mags)
    assert np.all(np.diff(w) <= 1e-12)
    assert np.all((w >= 0.0) & (w <= 1.0))


def test_weight_lower_bound_under_small_estimates():
    # with |b| <= gamma0 * lam the weight stays above (1 - kappa gamma0)
    for spec in (PenaltySpec.mcp(0.9, gamma=3.0), PenaltySpec.scad(0.9, a=3.7)):
        kappa = lipschitz_kappa(spec)
        gamma0 = 0.8 / kappa
        lam = spec.lam
        for b in np.linspace(0.0, gamma0 * lam, 50):
            w = float(weights_from_estimate(spec, [b])[0])
            assert w * lam >= (1.0 - kappa * gamma0) * lam - 1e-12


def test_rho_value_consistent_with_derivative():
    for spec in (PenaltySpec.mcp(1.1, gamma=2.4), PenaltySpec.scad(1.1, a=3.0)):
        grid = np.linspace(0.0, 6.0, 2000)
        vals = np.asarray(rho_value(spec, grid))
        # numerical integral of the derivative reproduces the value
        mid = 0.5 * (grid[1:] + grid[:-1])
        integral = np.cumsum(np.asarray(rho_derivative(spec, mid)) * np.diff(grid))
        np.testing.assert_allclose(vals[1:], integral, atol=5e-6)
        assert vals[0] == 0.0


def test_spec_validation():
    with pytest.raises(DomainError):
        PenaltySpec.mcp(1.0, gamma=1.0)
    with pytest.raises(DomainError):
        PenaltySpec.scad(1.0, a=2.0)
    with pytest.raises(DomainError):
        PenaltySpec.l1(0.0)
    with pytest.raises(DomainError):
        PenaltySpec("huber", 1.0)

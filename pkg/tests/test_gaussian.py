import math

import numpy as np
import pytest

from tvmrf.errors import DataError, SingularCovarianceError
from tvmrf.gaussian import (
    BackwardEstimate,
    CovarianceSeries,
    backward_estimate,
    build_intervals,
    default_thresholds,
    proxy_backward,
    sample_covariance,
    soft_threshold,
    upper_tri_indices,
)


def test_sample_covariance_outer_products():
    cov = sample_covariance([np.array([[1.0, 2.0]])])
    assert np.array_equal(cov.sigma[0], [[1.0, 2.0], [2.0, 4.0]])
    cov = sample_covariance([np.array([[1.0, 0.0], [-1.0, 0.0]])])
    assert np.array_equal(cov.sigma[0], [[1.0, 0.0], [0.0, 0.0]])


def test_sample_covariance_monte_carlo():
    rng = np.random.default_rng(42)
    x = rng.standard_normal((10_000, 2))
    cov = sample_covariance([x])
    assert np.max(np.abs(cov.sigma[0] - np.eye(2))) < 0.05


def test_sample_covariance_empty_slice():
    with pytest.raises(DataError):
        sample_covariance([np.zeros((0, 3))])


def test_soft_threshold_formula():
    m = np.array([[1.0, 0.5], [0.5, 2.0]])
    assert np.array_equal(soft_threshold(m, 0.0), m)
    out = soft_threshold(m, 0.2)
    assert out[0, 1] == pytest.approx(0.3)
    assert out[0, 0] == 1.0 and out[1, 1] == 2.0
    m2 = np.array([[1.0, -0.1], [-0.1, 2.0]])
    assert soft_threshold(m2, 0.2)[0, 1] == 0.0
    # a threshold above every off-diagonal magnitude leaves a diagonal matrix
    out = soft_threshold(m, 0.6)
    assert np.array_equal(out, np.diag([1.0, 2.0]))


def test_soft_threshold_contraction():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((6, 6))
    m = m + m.T + np.diag(np.full(6, 5.0))
    for nu in (0.0, 0.1, 0.5, 2.0):
        out = soft_threshold(m, nu)
        off = ~np.eye(6, dtype=bool)
        assert np.all(np.abs(out[off]) <= np.abs(m[off]) + 1e-15)
        assert np.array_equal(out, out.T)


def test_proxy_backward_identity_and_2x2():
    cov = CovarianceSeries(np.eye(2)[None], np.array([10]))
    for nu in (0.0, 0.3, 2.0):
        assert np.allclose(proxy_backward(cov, nu)[0], np.eye(2), atol=1e-14)
    cov = CovarianceSeries(np.array([[[2.0, 1.0], [1.0, 2.0]]]), np.array([10]))
    expected = np.array([[2.0, -1.0], [-1.0, 2.0]]) / 3.0
    assert np.allclose(proxy_backward(cov, 0.0)[0], expected, atol=1e-14)


def test_proxy_backward_residual_contract():
    rng = np.random.default_rng(7)
    n = 20
    a = rng.uniform(-0.5, 0.5, (n, n))
    a = 0.5 * (a + a.T)
    np.fill_diagonal(a, np.abs(a).sum(axis=1) + 1.0)
    cov = CovarianceSeries(a[None], np.array([100]))
    inv = proxy_backward(cov, 0.1)[0]
    m = soft_threshold(a, 0.1)
    assert np.max(np.abs(m @ inv - np.eye(n))) <= 1e-8
    assert np.array_equal(inv, inv.T)


def test_proxy_backward_singular():
    cov = CovarianceSeries(np.array([[[1.0, 1.0], [1.0, 1.0]]]), np.array([5]))
    with pytest.raises(SingularCovarianceError) as exc:
        proxy_backward(cov, 0.0)
    assert exc.value.t == 0
    assert "SINGULAR" in str(exc.value)


def test_default_thresholds():
    assert np.array_equal(default_thresholds(50, [100, 200], 0.0), [0.0, 0.0])
    got = default_thresholds(50, [2000], 0.2)[0]
    assert got == pytest.approx(0.2 * math.sqrt(math.log(50) / 2000))
    assert got == pytest.approx(0.00885, abs=5e-5)
    pooled = default_thresholds(50, [2000], 0.2, horizon=10)[0]
    assert pooled == pytest.approx(0.2 * math.sqrt(math.log(50) / 20000))


def test_build_intervals():
    theta = np.zeros((2, 2, 2))
    theta[:, 0, 1] = theta[:, 1, 0] = 0.35
    theta[:, 0, 0] = theta[:, 1, 1] = 1.0
    est = BackwardEstimate(theta, np.array([0.2, 0.2]), np.zeros(2))
    lower, upper, (ii, jj) = build_intervals(est)
    assert lower.shape == (3, 2)
    c = int(np.flatnonzero((ii == 0) & (jj == 1))[0])
    assert lower[c, 0] == pytest.approx(0.15) and upper[c, 0] == pytest.approx(0.55)
    assert not (lower[c, 0] <= 0.0 <= upper[c, 0])
    # zero-radius boxes pin the coordinate to the surrogate value
    est0 = BackwardEstimate(theta, np.zeros(2), np.zeros(2))
    l0, u0, _ = build_intervals(est0)
    assert np.array_equal(l0, u0)
    # negative surrogate with a wide radius keeps zero inside
    theta2 = theta.copy()
    theta2[:, 0, 1] = theta2[:, 1, 0] = -0.1
    est2 = BackwardEstimate(theta2, np.array([0.2, 0.2]), np.zeros(2))
    l2, u2, _ = build_intervals(est2)
    assert l2[c, 0] <= 0.0 <= u2[c, 0]


def test_round_trip_error_shrinks_with_samples():
    # median entrywise error of the plain inverse pipeline must decrease
    # strictly over a 100x growth in sample count
    n = 8
    theta_star = np.eye(n)
    for i in range(n - 1):
        theta_star[i, i + 1] = theta_star[i + 1, i] = -0.3
    np.fill_diagonal(theta_star, np.abs(theta_star).sum(axis=1) - 1.0 + 1.0)
    cov_true = np.linalg.inv(theta_star)
    L = np.linalg.cholesky(cov_true)
    errs = []
    for N in (500, 5_000, 50_000):
        per_seed = []
        for seed in range(5):
            rng = np.random.default_rng(seed)
            x = rng.standard_normal((N, n)) @ L.T
            cov = sample_covariance([x])
            est = proxy_backward(cov, 0.01)
            per_seed.append(np.max(np.abs(est[0] - theta_star)))
        errs.append(np.median(per_seed))
    assert errs[0] > errs[1] > errs[2]


def test_upper_tri_order():
    ii, jj = upper_tri_indices(3)
    assert list(zip(ii, jj)) == [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]


def test_backward_estimate_combines():
    cov = CovarianceSeries(np.eye(3)[None].repeat(2, axis=0), np.array([10, 10]))
    est = backward_estimate(cov, 0.1, 0.25)
    assert np.allclose(est.theta[0], np.eye(3))
    assert np.array_equal(est.lam, [0.25, 0.25])

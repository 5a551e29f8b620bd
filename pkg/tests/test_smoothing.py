import math

import numpy as np
import pytest

from tvmrf.errors import ConfigError
from tvmrf.smoothing import (
    TRUNC_GAUSS_NORM,
    KernelSpec,
    default_bandwidth,
    kernel_average,
    kernel_covariance,
    kernel_weights,
    stock_bandwidth,
)


def test_normalizer_value():
    assert TRUNC_GAUSS_NORM == pytest.approx(1.465, abs=5e-4)


def test_uniform_weights_formula():
    T, h, t = 20, 0.2, 10
    w = kernel_weights(t, T, KernelSpec("uniform", h), renormalize=False)
    th = T * h
    for s in range(T + 1):
        expected = 0.5 / th if abs(s - t) <= th else 0.0
        assert w[s] == pytest.approx(expected)


def test_weight_symmetry_interior():
    w = kernel_weights(10, 20, KernelSpec("truncated-gaussian", 0.3), renormalize=False)
    for d in range(1, 7):
        assert w[10 - d] == pytest.approx(w[10 + d])


def test_gaussian_peak_value():
    T, h, t = 16, 0.25, 8
    w = kernel_weights(t, T, KernelSpec("truncated-gaussian", h), renormalize=False)
    assert w[t] == pytest.approx(TRUNC_GAUSS_NORM / (T * h))


def test_weights_bounded_and_renormalized():
    T, h = 12, 0.4
    spec = KernelSpec("truncated-gaussian", h)
    for t in (0, 5, 12):
        raw = kernel_weights(t, T, spec, renormalize=False)
        assert np.all(raw >= 0.0)
        assert np.all(raw <= TRUNC_GAUSS_NORM / (T * h) + 1e-15)
        norm = kernel_weights(t, T, spec)
        assert norm.sum() == pytest.approx(1.0)


def test_bad_spec():
    with pytest.raises(ConfigError):
        KernelSpec("boxcar", 0.2)
    with pytest.raises(ConfigError):
        KernelSpec("uniform", 0.0)
    with pytest.raises(ConfigError):
        KernelSpec("uniform", 1.5)


def test_delta_limit_reduces_to_pointwise():
    rng = np.random.default_rng(0)
    stats = rng.standard_normal((9, 3, 3))
    # bandwidth small enough that only s = t has weight
    out = kernel_average(stats, KernelSpec("uniform", 0.05))
    assert np.allclose(out, stats, atol=1e-14)


def test_constant_data_average():
    xbar = np.array([1.0, -2.0])
    samples = [np.tile(xbar, (1, 1)) for _ in range(8)]
    cov = kernel_covariance(samples, KernelSpec("truncated-gaussian", 0.5))
    for t in range(8):
        assert np.allclose(cov.sigma[t], np.outer(xbar, xbar), atol=1e-14)


def test_stationary_monte_carlo():
    # a handful of draws per step, averaged per time before the kernel sweep
    rng = np.random.default_rng(3)
    T = 200
    cov_true = np.array([[1.0, 0.4, 0.0], [0.4, 1.0, 0.2], [0.0, 0.2, 1.0]])
    L = np.linalg.cholesky(cov_true)
    samples = [(rng.standard_normal((4, 3)) @ L.T) for _ in range(T + 1)]
    h = default_bandwidth(T)
    out = kernel_covariance(samples, KernelSpec("truncated-gaussian", h))
    err = max(np.max(np.abs(out.sigma[t] - cov_true)) for t in (50, 100, 150))
    assert err < 0.1


def test_bandwidth_defaults():
    assert default_bandwidth(256) == pytest.approx(0.25)
    assert stock_bandwidth(234) == pytest.approx(0.02 * 234 ** (-1 / 3))


def test_symmetry_preserved():
    rng = np.random.default_rng(1)
    x = [rng.standard_normal((4, 3)) for _ in range(6)]
    cov = kernel_covariance(x, KernelSpec("uniform", 0.4))
    assert np.allclose(cov.sigma, cov.sigma.transpose(0, 2, 1), atol=1e-15)


def test_single_step_averaging_rejected():
    with pytest.raises(ConfigError):
        kernel_average(np.zeros((1, 2, 2)), KernelSpec("uniform", 0.5))

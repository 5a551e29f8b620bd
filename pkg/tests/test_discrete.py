import math

import numpy as np
import pytest

from tvmrf.discrete import (
    MarginalTables,
    build_intervals_dmrf,
    build_intervals_dmrf_streaming,
    dmrf_coordinate_indices,
    empirical_marginals,
    laplace_smooth,
    trw_backward,
)
from tvmrf.errors import DataError, ZeroMarginalError
from tvmrf.smoothing import KernelSpec, kernel_average


def test_node_frequencies():
    x = np.array([[0], [0], [1], [1]])
    m = empirical_marginals([x], K=2)
    assert m.node(0, 0, 0) == 0.5 and m.node(0, 0, 1) == 0.5


def test_perfectly_correlated_pair():
    x = np.array([[0, 0], [1, 1], [0, 0], [1, 1]])
    m = empirical_marginals([x], K=2)
    assert m.edge(0, 0, 1, 0, 0) == 0.5
    assert m.edge(0, 0, 1, 1, 1) == 0.5
    assert m.edge(0, 0, 1, 0, 1) == 0.0
    assert m.edge(0, 0, 1, 1, 0) == 0.0


def test_independent_coins_monte_carlo():
    rng = np.random.default_rng(5)
    x = rng.integers(0, 2, size=(100_000, 2))
    m = empirical_marginals([x], K=2)
    for k in (0, 1):
        for l in (0, 1):
            assert m.edge(0, 0, 1, k, l) == pytest.approx(0.25, abs=0.01)


def test_out_of_range_category():
    with pytest.raises(DataError):
        empirical_marginals([np.array([[0], [2]])], K=2)


def test_marginal_consistency():
    rng = np.random.default_rng(11)
    x = rng.integers(0, 3, size=(50, 4))
    m = empirical_marginals([x], K=3)
    for i in range(4):
        for j in range(4):
            if i == j:
                continue
            for k in range(3):
                row = sum(m.edge(0, i, j, k, l) for l in range(3))
                assert row == pytest.approx(m.node(0, i, k), abs=1e-12)


def test_laplace_smoothing():
    x = np.array([[0], [0], [0], [0]])
    m = empirical_marginals([x], K=2)
    assert laplace_smooth(m, 0.0) is m
    sm = laplace_smooth(m, 1.0)
    assert sm.node(0, 0, 0) == pytest.approx(5.0 / 6.0)
    assert sm.node(0, 0, 1) == pytest.approx(1.0 / 6.0)
    # probabilities move toward uniform and keep summing to one
    rng = np.random.default_rng(3)
    y = rng.integers(0, 2, size=(20, 3))
    m2 = empirical_marginals([y], K=2)
    sm2 = laplace_smooth(m2, 2.5)
    for i in range(3):
        tot = sm2.node(0, i, 0) + sm2.node(0, i, 1)
        assert tot == pytest.approx(1.0)
        for k in (0, 1):
            raw, smoothed = m2.node(0, i, k), sm2.node(0, i, k)
            assert abs(smoothed - 0.5) <= abs(raw - 0.5) + 1e-12
            assert 0.0 <= smoothed <= 1.0


def _hand_grid():
    # two binary nodes; node marginals 0.5 and an edge slot at 0.5 give a
    # dependence ratio of exactly 2 at the (1, 1) slot
    g = np.array(
        [
            [0.5, 0.0, 0.3, 0.2],
            [0.0, 0.5, 0.2, 0.3],
            [0.3, 0.2, 0.5, 0.0],
            [0.2, 0.3, 0.0, 0.5],
        ]
    )
    g = g.copy()
    g[1, 3] = g[3, 1] = 0.5
    g[1, 2] = g[2, 1] = 0.2
    return MarginalTables(g[None], 2, np.array([4]))


def test_trw_log_ratio_value():
    theta = trw_backward(_hand_grid())
    assert theta[0, 1, 3] == pytest.approx(math.log(2.0))
    assert theta[0, 0, 0] == pytest.approx(math.log(0.5))


def test_trw_independence_null():
    # exact product marginals zero out every edge parameter
    node = np.array([0.3, 0.7, 0.6, 0.4])
    g = np.outer(node, node)
    g[np.eye(4, dtype=bool)] = node
    g[0, 1] = g[1, 0] = 0.0
    g[2, 3] = g[3, 2] = 0.0
    m = MarginalTables(g[None], 2, np.array([10]))
    theta = trw_backward(m)
    blk = np.arange(4) // 2
    edge_mask = blk[:, None] != blk[None, :]
    assert np.allclose(theta[0][edge_mask], 0.0, atol=1e-14)


def test_trw_rho_zero():
    theta = trw_backward(_hand_grid(), rho=0.0)
    assert theta[0, 1, 3] == 0.0
    assert theta[0, 0, 0] == pytest.approx(math.log(0.5))  # nodes unaffected


def test_trw_edge_symmetry():
    rng = np.random.default_rng(2)
    x = rng.integers(0, 2, size=(40, 5))
    m = laplace_smooth(empirical_marginals([x], K=2), 1.0)
    theta = trw_backward(m)
    assert np.allclose(theta[0], theta[0].T, atol=1e-15)


def test_trw_zero_marginal_error():
    x = np.array([[0, 0], [1, 1]])
    m = empirical_marginals([x], K=2)
    with pytest.raises(ZeroMarginalError) as exc:
        trw_backward(m)
    assert "ZERO_MARGINAL" in str(exc.value)
    assert exc.value.t == 0


def test_interval_construction():
    theta = np.zeros((1, 4, 4))
    theta[0, 0, 2] = theta[0, 2, 0] = 0.7
    theta[0, 1, 3] = theta[0, 3, 1] = 0.1
    lower, upper, (r, c) = build_intervals_dmrf(theta, K=2, lam=0.3)
    assert lower.shape[0] == 2 * 2 + 1 * 4  # node + edge coordinate count
    c1 = int(np.flatnonzero((r == 0) & (c == 2))[0])
    assert (lower[c1, 0], upper[c1, 0]) == (pytest.approx(0.4), pytest.approx(1.0))
    c2 = int(np.flatnonzero((r == 1) & (c == 3))[0])
    assert lower[c2, 0] <= 0.0 <= upper[c2, 0]
    l0, u0, _ = build_intervals_dmrf(theta, K=2, lam=0.0)
    assert np.array_equal(l0, u0)


def test_coordinate_count_formula():
    for n, K in ((3, 2), (5, 3)):
        r, c = dmrf_coordinate_indices(n, K)
        assert r.shape[0] == n * K + n * (n - 1) // 2 * K * K


def test_streaming_matches_composed_pipeline():
    rng = np.random.default_rng(8)
    samples = [rng.integers(0, 2, size=(30, 4)) for _ in range(7)]
    lam = 0.4
    # no kernel
    m = laplace_smooth(empirical_marginals(samples, K=2), 0.5)
    theta = trw_backward(m)
    lo_ref, hi_ref, _ = build_intervals_dmrf(theta, K=2, lam=lam)
    lo, hi, _ = build_intervals_dmrf_streaming(samples, K=2, lam=lam, alpha=0.5)
    assert np.allclose(lo, lo_ref, atol=1e-12) and np.allclose(hi, hi_ref, atol=1e-12)
    # with kernel averaging
    spec = KernelSpec("truncated-gaussian", 0.35)
    raw = empirical_marginals(samples, K=2)
    avg = MarginalTables(kernel_average(raw.grid, spec), 2, raw.counts)
    theta2 = trw_backward(laplace_smooth(avg, 0.5))
    lo2_ref, hi2_ref, _ = build_intervals_dmrf(theta2, K=2, lam=lam)
    lo2, hi2, _ = build_intervals_dmrf_streaming(
        samples, K=2, lam=lam, alpha=0.5, spec=spec
    )
    assert np.allclose(lo2, lo2_ref, atol=1e-12)
    assert np.allclose(hi2, hi2_ref, atol=1e-12)

import numpy as np
import pytest

from tvmrf.errors import ConfigError
from tvmrf.synth import GroundTruth, generate_truth, make_instance, sample_gaussian


def test_support_size_and_value():
    truth = generate_truth(50, 10, 0.04, seed=3)
    for t in range(11):
        m = truth.theta[t]
        off = m[~np.eye(50, dtype=bool)]
        assert np.count_nonzero(off) == 150  # 3n entries, both triangles
        assert np.all(off[off != 0] == -0.4)
        assert np.array_equal(m, m.T)


def test_diagonal_rule_exact():
    truth = generate_truth(20, 4, 0.04, seed=1)
    for t in range(5):
        m = truth.theta[t]
        gap = np.diagonal(m) - (np.sum(np.abs(m), axis=1) - np.abs(np.diagonal(m)))
        assert np.allclose(gap, 1.0, atol=1e-15)


def test_swap_counts():
    # ceil(0.04 * 75) = 3 upper-triangular swaps per step at n = 50
    truth = generate_truth(50, 6, 0.04, seed=9)
    sup = truth.supports()
    for t in range(1, 7):
        flips = np.count_nonzero(sup[t] != sup[t - 1])
        assert flips == 6  # three pairs out, three pairs in
        assert sup[t].sum() == sup[t - 1].sum()


def test_change_frac_zero_keeps_support():
    truth = generate_truth(12, 5, 0.0, seed=4)
    sup = truth.supports()
    assert np.all(sup == sup[0])


def test_positive_definite_many_seeds():
    for seed in range(100):
        truth = generate_truth(50, 10, 0.04, seed=seed)
        for t in range(truth.theta.shape[0]):
            np.linalg.cholesky(truth.theta[t])  # raises if not PD


def test_infeasible_parameters():
    with pytest.raises(ConfigError):
        generate_truth(3, 2, 0.04, seed=0)
    with pytest.raises(ConfigError):
        generate_truth(10, 2, 1.0, seed=0)


def test_sampling_determinism_and_distribution():
    truth = GroundTruth(np.eye(4)[None].repeat(3, axis=0), seed=0)
    a = sample_gaussian(truth, 11, seed=5)
    b = sample_gaussian(truth, 11, seed=5)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
    big = sample_gaussian(truth, 100_000, seed=6)[0]
    cov = big.T @ big / big.shape[0]
    assert np.max(np.abs(cov - np.eye(4))) < 0.05


def test_sampling_rejects_empty():
    truth = GroundTruth(np.eye(3)[None], seed=0)
    with pytest.raises(ConfigError):
        sample_gaussian(truth, 0, seed=1)


def test_instance_streams_are_distinct():
    truth, train, valid = make_instance(10, 3, 7, 0.04, seed=2)
    assert len(train) == len(valid) == 4
    assert all(x.shape == (7, 10) for x in train)
    assert not np.array_equal(train[0], valid[0])
    # regenerating reproduces both streams bit for bit
    _, train2, valid2 = make_instance(10, 3, 7, 0.04, seed=2)
    assert all(np.array_equal(a, b) for a, b in zip(train, train2))
    assert all(np.array_equal(a, b) for a, b in zip(valid, valid2))

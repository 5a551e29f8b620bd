"""Synthetic sparsely-changing Gaussian instances.

The construction: 3n off-diagonal entries of the precision matrix are
nonzero (1.5n upper-triangular pairs, mirrored), all equal to -0.4; each
later time step swaps a fixed fraction of the nonzero pairs against zero
pairs; diagonals are set to one plus the absolute row sum, which makes the
matrices strictly diagonally dominant and hence positive definite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import ConfigError, NotPositiveDefiniteError

__all__ = ["GroundTruth", "generate_truth", "sample_gaussian", "make_instance"]

RNG_ALGORITHM = "PCG64"  # numpy default_rng; recorded for reproducibility

OFF_VALUE = -0.4


@dataclass
class GroundTruth:
    theta: np.ndarray  # (T+1, n, n) precision matrices
    seed: int
    off_value: float = OFF_VALUE
    rng_algorithm: str = field(default=RNG_ALGORITHM)

    @property
    def n(self):
        return self.theta.shape[1]

    @property
    def horizon(self):
        return self.theta.shape[0] - 1

    def supports(self):
        """Upper-triangular (i < j) support masks per time step."""
        n = self.n
        iu = np.triu_indices(n, k=1)
        return (self.theta[:, iu[0], iu[1]] != 0.0)


def _build_matrix(n, pairs, off_value):
    theta = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    theta[iu[0][pairs], iu[1][pairs]] = off_value
    theta = theta + theta.T
    # diagonal from the integer degree: equal degrees give bit-identical
    # values across time steps (a pairwise float sum would not)
    degree = np.count_nonzero(theta, axis=1)
    np.fill_diagonal(theta, 1.0 + abs(off_value) * degree)
    return theta


def generate_truth(
    n: int, T: int, change_frac: float = 0.04, seed: int = 0, off_value: float = OFF_VALUE
) -> GroundTruth:
    """Random support at t = 0, then per-step swaps of ceil(frac * 1.5n) pairs.

    Deterministic under the seed; every matrix is verified positive definite
    by factorization.
    """
    npairs = n * (n - 1) // 2
    m0 = (3 * n) // 2
    if n < 4 or m0 > npairs:
        raise ConfigError(f"n={n} leaves no room for {m0} nonzero pairs among {npairs}")
    if not 0.0 <= change_frac < 1.0:
        raise ConfigError(f"change_frac must be in [0, 1), got {change_frac}")
    rng = np.random.default_rng(seed)
    swaps = math.ceil(change_frac * m0)
    active = rng.choice(npairs, size=m0, replace=False)
    thetas = [_build_matrix(n, active, off_value)]
    for _ in range(T):
        if swaps:
            mask = np.zeros(npairs, dtype=bool)
            mask[active] = True
            out_sel = rng.choice(active, size=swaps, replace=False)
            inactive = np.flatnonzero(~mask)
            in_sel = rng.choice(inactive, size=swaps, replace=False)
            mask[out_sel] = False
            mask[in_sel] = True
            active = np.flatnonzero(mask)
        thetas.append(_build_matrix(n, active, off_value))
    theta = np.array(thetas)
    for t in range(T + 1):
        try:
            np.linalg.cholesky(theta[t])
        except np.linalg.LinAlgError:
            raise NotPositiveDefiniteError(t) from None
    return GroundTruth(theta, seed, off_value)


def sample_gaussian(truth: GroundTruth, counts, seed: int) -> list[np.ndarray]:
    """counts iid zero-mean draws per time step with covariance theta_t^{-1}.

    Draws are standard normals pushed through the inverse Cholesky factor of
    the precision matrix; bit-reproducible under the seed.
    """
    counts = np.broadcast_to(np.asarray(counts, dtype=np.int64), (truth.theta.shape[0],))
    if (counts < 1).any():
        raise ConfigError("need at least one sample per time step")
    rng = np.random.default_rng(seed)
    out = []
    for t in range(truth.theta.shape[0]):
        try:
            L = np.linalg.cholesky(truth.theta[t])
        except np.linalg.LinAlgError:
            raise NotPositiveDefiniteError(t) from None
        z = rng.standard_normal((int(counts[t]), truth.n))
        # x = L^{-T} z has covariance (L L^T)^{-1} = theta^{-1}
        out.append(linalg.solve_triangular(L, z.T, lower=True, trans="T").T)
    return out


def make_instance(n: int, T: int, N: int, change_frac: float = 0.04, seed: int = 0):
    """Ground truth plus an independent train/validation sample pair.

    Stream order is fixed: truth first, then training draws, then validation
    draws, all from one seeded generator lineage.
    """
    truth = generate_truth(n, T, change_frac, seed)
    train = sample_gaussian(truth, N, seed + 1_000_003)
    valid = sample_gaussian(truth, N, seed + 2_000_003)
    return truth, train, valid

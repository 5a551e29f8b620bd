"""Gaussian front end: from samples to per-coordinate box constraints.

The canonical parameter is the precision matrix; its surrogate estimate is
the inverse of the soft-thresholded second-moment matrix.  Each
upper-triangular entry (i <= j) becomes one coordinate problem with boxes
``surrogate +- lambda_t``; only the upper triangle is solved and the result
is mirrored.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DataError, SingularCovarianceError

__all__ = [
    "CovarianceSeries",
    "BackwardEstimate",
    "sample_covariance",
    "soft_threshold",
    "proxy_backward",
    "default_thresholds",
    "default_deviations",
    "backward_estimate",
    "build_intervals",
    "upper_tri_indices",
]

_SYM_TOL = 1e-12
_PIVOT_REL_TOL = 1e-10
_RESIDUAL_TOL = 1e-8


@dataclass
class CovarianceSeries:
    """Second-moment matrices per time step plus the sample counts."""

    sigma: np.ndarray  # (T+1, n, n)
    counts: np.ndarray  # (T+1,)

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        self.counts = np.asarray(self.counts)
        if self.sigma.ndim != 3 or self.sigma.shape[1] != self.sigma.shape[2]:
            raise DataError("covariance series must be (T+1, n, n)")
        asym = np.max(np.abs(self.sigma - self.sigma.transpose(0, 2, 1)))
        if asym > _SYM_TOL:
            raise DataError(f"covariance matrices must be symmetric (max asymmetry {asym:.2e})")
        diags = self.sigma[:, np.arange(self.sigma.shape[1]), np.arange(self.sigma.shape[1])]
        # second moments have nonnegative diagonals by construction; a zero
        # diagonal (degenerate coordinate) surfaces later as SINGULAR
        if (diags < 0).any():
            raise DataError("covariance diagonals must be nonnegative")

    @property
    def n(self):
        return self.sigma.shape[1]

    @property
    def horizon(self):
        return self.sigma.shape[0] - 1


@dataclass
class BackwardEstimate:
    """Surrogate canonical parameters plus the box radii used downstream."""

    theta: np.ndarray  # (T+1, n, n), symmetric
    lam: np.ndarray  # (T+1,)
    nu: np.ndarray  # (T+1,) thresholds that produced theta

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        self.lam = np.broadcast_to(np.asarray(self.lam, dtype=np.float64), (self.theta.shape[0],)).copy()
        self.nu = np.broadcast_to(np.asarray(self.nu, dtype=np.float64), (self.theta.shape[0],)).copy()
        if (self.lam < 0).any():
            raise DataError("lambda radii must be nonnegative")


def sample_covariance(samples, center: bool = False) -> CovarianceSeries:
    """Per-time second-moment matrices (1/N_t) sum_i x x^T.

    The zero-mean convention is the default; ``center`` subtracts the
    per-time empirical mean first (for real data).
    """
    sigmas = []
    counts = []
    for t, x in enumerate(samples):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1:
            raise DataError(f"time slice t={t} needs at least one sample")
        if center:
            x = x - x.mean(axis=0)
        sigmas.append(x.T @ x / x.shape[0])
        counts.append(x.shape[0])
    return CovarianceSeries(np.array(sigmas), np.array(counts))


def soft_threshold(sigma: np.ndarray, nu: float) -> np.ndarray:
    """Shrink off-diagonal magnitudes by min(|entry|, nu); diagonal untouched."""
    sigma = np.asarray(sigma, dtype=np.float64)
    out = sigma - np.sign(sigma) * np.minimum(np.abs(sigma), nu)
    np.fill_diagonal(out, np.diagonal(sigma))
    return out


def _invert_symmetric(m: np.ndarray, t: int) -> np.ndarray:
    """Dense inverse with explicit singularity detection and residual check."""
    n = m.shape[0]
    scale = np.max(np.abs(m))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", linalg.LinAlgWarning)
            lu, piv = linalg.lu_factor(m)
    except linalg.LinAlgError:
        raise SingularCovarianceError(t, math.inf) from None
    if np.min(np.abs(np.diagonal(lu))) <= _PIVOT_REL_TOL * scale:
        raise SingularCovarianceError(t, float(np.linalg.cond(m)))
    inv = linalg.lu_solve((lu, piv), np.eye(n))
    if np.max(np.abs(m @ inv - np.eye(n))) > _RESIDUAL_TOL:
        raise SingularCovarianceError(t, float(np.linalg.cond(m)))
    return 0.5 * (inv + inv.T)


def proxy_backward(cov: CovarianceSeries, nu_per_t) -> np.ndarray:
    """Inverse of the soft-thresholded second moments, one matrix per t."""
    nu_per_t = np.broadcast_to(np.asarray(nu_per_t, dtype=np.float64), (cov.sigma.shape[0],))
    out = np.empty_like(cov.sigma)
    for t in range(cov.sigma.shape[0]):
        out[t] = _invert_symmetric(soft_threshold(cov.sigma[t], nu_per_t[t]), t)
    return out


def default_thresholds(n: int, counts, nu0: float, horizon: int | None = None) -> np.ndarray:
    """Statistical shrinkage rule nu0 * sqrt(log n / N_t).

    With ``horizon`` set, the denominator becomes horizon * N_t (the pooled
    variant used by the synthetic study).
    """
    if n < 2:
        raise DataError("need n >= 2 for the log n threshold rule")
    counts = np.asarray(counts, dtype=np.float64)
    if (counts <= 0).any():
        raise DataError("sample counts must be positive")
    denom = counts * horizon if horizon else counts
    return nu0 * np.sqrt(math.log(n) / denom)


def default_deviations(n: int, counts, lam0: float) -> np.ndarray:
    """Box radius rule lam0 * sqrt(log n / N_t)."""
    counts = np.asarray(counts, dtype=np.float64)
    return lam0 * np.sqrt(math.log(n) / counts)


def backward_estimate(cov: CovarianceSeries, nu_per_t, lam_per_t) -> BackwardEstimate:
    nu = np.broadcast_to(np.asarray(nu_per_t, dtype=np.float64), (cov.sigma.shape[0],))
    return BackwardEstimate(proxy_backward(cov, nu), lam_per_t, nu)


def upper_tri_indices(n: int):
    """Row-major (i, j) with i <= j; the coordinate order used everywhere."""
    return np.triu_indices(n)


def build_intervals(estimate: BackwardEstimate):
    """One box sequence per upper-triangular coordinate.

    Returns (lower, upper, (i_idx, j_idx)) with lower/upper of shape
    (n(n+1)/2, T+1); coordinate c is entry (i_idx[c], j_idx[c]).
    """
    i_idx, j_idx = upper_tri_indices(estimate.theta.shape[1])
    centers = estimate.theta[:, i_idx, j_idx].T  # (P, T+1)
    lam = estimate.lam[np.newaxis, :]
    return centers - lam, centers + lam, (i_idx, j_idx)

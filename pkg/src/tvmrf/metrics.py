"""Scoring of estimated parameter sequences and path cross-validation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dp import gamma_to_bar
from .errors import DataError, NotPositiveDefiniteError, NumericalError
from .gaussian import upper_tri_indices

__all__ = [
    "MetricReport",
    "CrossValResult",
    "estimation_error",
    "f1_support",
    "neg_log_likelihood",
    "assemble_gmrf",
    "cross_validate",
    "score_gamma_grid",
    "second_moments",
    "default_gamma_grid",
]


@dataclass
class MetricReport:
    gamma: float
    nll: float
    f1_params: float = float("nan")
    f1_diffs: float = float("nan")
    error: float = float("nan")


@dataclass
class CrossValResult:
    best_gamma: float
    reports: list[MetricReport]
    best_estimate: np.ndarray


def default_gamma_grid() -> np.ndarray:
    """The 99-point grid {0.01, ..., 0.99}."""
    return np.arange(1, 100) / 100.0


def estimation_error(truth: np.ndarray, estimate: np.ndarray) -> float:
    """Relative root-sum-of-squares over the upper triangle incl. diagonal."""
    truth = np.asarray(truth, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if truth.shape != estimate.shape:
        raise DataError(f"shape mismatch: {truth.shape} vs {estimate.shape}")
    i, j = upper_tri_indices(truth.shape[1])
    num = float(np.sum((truth[:, i, j] - estimate[:, i, j]) ** 2))
    den = float(np.sum(truth[:, i, j] ** 2))
    if den == 0.0:
        raise DataError("estimation error undefined for an all-zero reference")
    return float(np.sqrt(num / den))


def _f1(tp: int, fp: int, fn: int) -> float:
    # empty-vs-empty counts as a perfect match; no true positives otherwise is 0
    if tp == 0:
        return 1.0 if fp == 0 and fn == 0 else 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def f1_support(truth: np.ndarray, estimate: np.ndarray, mode: str = "params") -> float:
    """F1 of the off-diagonal support ('params') or of the change pattern
    between consecutive steps ('diffs')."""
    truth = np.asarray(truth)
    estimate = np.asarray(estimate)
    if truth.shape != estimate.shape:
        raise DataError(f"shape mismatch: {truth.shape} vs {estimate.shape}")
    i, j = np.triu_indices(truth.shape[1], k=1)
    ts = truth[:, i, j] != 0.0
    es = estimate[:, i, j] != 0.0
    if mode == "params":
        a, b = ts, es
    elif mode == "diffs":
        if truth.shape[0] < 2:
            raise DataError("diffs mode needs at least two time steps")
        a = ts[1:] != ts[:-1]
        b = es[1:] != es[:-1]
    else:
        raise DataError(f"unknown f1 mode {mode!r}")
    tp = int(np.sum(a & b))
    fp = int(np.sum(~a & b))
    fn = int(np.sum(a & ~b))
    return _f1(tp, fp, fn)


def second_moments(validation):
    moments = []
    counts = []
    for x in validation:
        x = np.asarray(x, dtype=np.float64)
        moments.append(x.T @ x)
        counts.append(x.shape[0])
    return np.array(moments), np.array(counts)


def _nll_from_moments(estimate, moments, counts) -> float:
    total = 0.0
    for t in range(estimate.shape[0]):
        try:
            L = np.linalg.cholesky(estimate[t])
        except np.linalg.LinAlgError:
            raise NotPositiveDefiniteError(t) from None
        logdet = 2.0 * float(np.sum(np.log(np.diagonal(L))))
        quad = float(np.sum(estimate[t] * moments[t]))
        total += -0.5 * counts[t] * logdet + 0.5 * quad
    return total


def neg_log_likelihood(estimate: np.ndarray, validation) -> float:
    """Gaussian negative log-likelihood up to the dropped constant term.

    Raises when some matrix is not positive definite, naming the time step;
    a path solution can pin a diagonal away from feasibility and that must
    surface rather than be scored.
    """
    estimate = np.asarray(estimate, dtype=np.float64)
    moments, counts = second_moments(validation)
    if moments.shape[0] != estimate.shape[0]:
        raise DataError("validation and estimate horizons differ")
    return _nll_from_moments(estimate, moments, counts)


def assemble_gmrf(paths, n: int, bar_gamma: float, cache: dict | None = None) -> np.ndarray:
    """Symmetric matrices from the per-coordinate paths at one weight.

    ``paths`` follows the row-major upper-triangular coordinate order of
    :func:`tvmrf.gaussian.build_intervals`.  Pass a dict as ``cache`` to
    reuse reconstructed trajectories across nearby grid points.
    """
    i_idx, j_idx = upper_tri_indices(n)
    if len(paths) != i_idx.shape[0]:
        raise DataError(f"expected {i_idx.shape[0]} coordinate paths, got {len(paths)}")
    Tp1 = paths[0].problem.lower.shape[0]
    theta = np.zeros((Tp1, n, n))
    for c, path in enumerate(paths):
        k = path.k_at(bar_gamma)
        traj = None
        if cache is not None:
            traj = cache.get((c, k))
        if traj is None:
            traj = path.trajectory(k)
            if traj is None:
                raise NumericalError(f"coordinate {c}: budget {k} infeasible")
            if cache is not None:
                cache[(c, k)] = traj
        theta[:, i_idx[c], j_idx[c]] = traj
        theta[:, j_idx[c], i_idx[c]] = traj
    return theta


def score_gamma_grid(estimate_fn, gamma_grid, moments, counts, truth=None):
    """Score every grid point; non-PD estimates score +inf rather than fail.

    Returns (best_index, reports).  Ties take the smallest gamma; an error
    is raised when no grid point yields a positive-definite estimate.
    """
    reports = []
    best_idx = -1
    best_nll = np.inf
    for gi, gamma in enumerate(gamma_grid):
        est = estimate_fn(float(gamma))
        try:
            nll = _nll_from_moments(est, moments, counts)
        except NotPositiveDefiniteError:
            nll = np.inf
        rep = MetricReport(float(gamma), float(nll))
        if truth is not None:
            rep.f1_params = f1_support(truth, est, "params")
            rep.f1_diffs = f1_support(truth, est, "diffs") if truth.shape[0] > 1 else float("nan")
            rep.error = estimation_error(truth, est)
        reports.append(rep)
        if nll < best_nll:
            best_nll = nll
            best_idx = gi
    if best_idx < 0:
        raise NumericalError("no grid point produced a positive-definite estimate")
    return best_idx, reports


def cross_validate(paths, n: int, validation, gamma_grid=None, truth=None) -> CrossValResult:
    """Pick the sparsity level by validation likelihood over the path."""
    grid = default_gamma_grid() if gamma_grid is None else np.asarray(gamma_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.shape[0] < 1:
        raise DataError("gamma grid must be a nonempty 1-d array")
    moments, counts = second_moments(validation)
    cache: dict = {}

    def estimate_fn(gamma):
        return assemble_gmrf(paths, n, gamma_to_bar(gamma), cache)

    best_idx, reports = score_gamma_grid(estimate_fn, grid, moments, counts, truth)
    return CrossValResult(float(grid[best_idx]), reports, estimate_fn(float(grid[best_idx])))

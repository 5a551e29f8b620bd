"""Discrete front end: empirical marginals and the tree-reweighted mapping.

Node and edge marginals are stored together in one symmetric block grid of
shape (nK, nK): entry (iK + k, jK + l) is the edge marginal P(x_i = k,
x_j = l) for i != j, and the diagonal holds the node marginals P(x_i = k).
Off-diagonal slots inside a diagonal block are structurally zero (a
variable cannot take two states at once) and are never treated as
coordinates.  The same grid layout carries the canonical parameters, so
coordinate (r, c) of the grid is coordinate (r, c) of the solution path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, ZeroMarginalError
from .smoothing import KernelSpec, kernel_average

__all__ = [
    "MarginalTables",
    "empirical_marginals",
    "laplace_smooth",
    "trw_backward",
    "dmrf_coordinate_indices",
    "build_intervals_dmrf",
    "build_intervals_dmrf_streaming",
]


@dataclass
class MarginalTables:
    """Block grid of node/edge marginals plus bookkeeping."""

    grid: np.ndarray  # (T+1, nK, nK)
    K: int
    counts: np.ndarray  # (T+1,)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        self.counts = np.asarray(self.counts)
        if self.grid.ndim != 3 or self.grid.shape[1] != self.grid.shape[2]:
            raise DataError("marginal grid must be (T+1, nK, nK)")
        if self.grid.shape[1] % self.K != 0:
            raise DataError("grid side must be a multiple of K")

    @property
    def n(self):
        return self.grid.shape[1] // self.K

    def node(self, t, i, k):
        return self.grid[t, i * self.K + k, i * self.K + k]

    def edge(self, t, i, j, k, l):
        return self.grid[t, i * self.K + k, j * self.K + l]


def _one_hot(x: np.ndarray, K: int, t: int) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] < 1:
        raise DataError(f"time slice t={t} needs at least one sample")
    if x.min() < 0 or x.max() >= K:
        raise DataError(f"t={t}: category out of range [0, {K - 1}]")
    N, n = x.shape
    z = np.zeros((N, n * K))
    cols = x + np.arange(n) * K
    z[np.arange(N)[:, None], cols] = 1.0
    return z


def _grid_at(x: np.ndarray, K: int, t: int) -> np.ndarray:
    z = _one_hot(x, K, t)
    return z.T @ z / z.shape[0]


def empirical_marginals(samples, K: int) -> MarginalTables:
    """Plain frequencies of node states and state pairs, no smoothing."""
    if K < 2:
        raise ConfigError("need K >= 2 states")
    grids = []
    counts = []
    for t, x in enumerate(samples):
        grids.append(_grid_at(np.asarray(x), K, t))
        counts.append(np.asarray(x).shape[0])
    return MarginalTables(np.array(grids), K, np.array(counts))


def _block_masks(nK: int, K: int):
    blk = np.arange(nK) // K
    same = blk[:, None] == blk[None, :]
    eye = np.eye(nK, dtype=bool)
    return eye, (~same)  # node slots, edge slots


def laplace_smooth(m: MarginalTables, alpha: float) -> MarginalTables:
    """Pseudocount smoothing: node (c + a)/(N + K a), edge (c + a)/(N + K^2 a).

    alpha = 0 returns the tables unchanged; structural zeros stay zero.
    """
    if alpha < 0:
        raise ConfigError("alpha must be nonnegative")
    if alpha == 0:
        return m
    K = m.K
    node_mask, edge_mask = _block_masks(m.grid.shape[1], K)
    out = np.zeros_like(m.grid)
    N = m.counts.astype(np.float64)[:, None, None]
    g = m.grid
    out = np.where(node_mask, (g * N + alpha) / (N + K * alpha), out)
    out = np.where(edge_mask, (g * N + alpha) / (N + K * K * alpha), out)
    return MarginalTables(out, K, m.counts)


def _trw_grid(grid_t: np.ndarray, K: int, rho_grid, t: int) -> np.ndarray:
    """One time step of the tree-reweighted mapping on the block grid."""
    nK = grid_t.shape[0]
    node_mask, edge_mask = _block_masks(nK, K)
    mu_node = np.diagonal(grid_t)
    if (mu_node <= 0).any():
        r = int(np.argmax(mu_node <= 0))
        raise ZeroMarginalError(t, f"node (i={r // K}, k={r % K})")
    bad = edge_mask & (grid_t <= 0)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise ZeroMarginalError(
            t, f"edge (i={r // K}, j={c // K}, k={r % K}, l={c % K})"
        )
    theta = np.zeros_like(grid_t)
    theta[node_mask] = np.log(mu_node)
    denom = np.outer(mu_node, mu_node)
    ratio = np.where(edge_mask, grid_t / np.where(edge_mask, denom, 1.0), 1.0)
    theta = np.where(edge_mask, rho_grid * np.log(ratio), theta)
    return theta


def _rho_grid(rho, n: int, K: int) -> np.ndarray:
    """Expand scalar or (n, n) edge weights to the block grid."""
    if np.isscalar(rho):
        return np.full((n * K, n * K), float(rho))
    rho = np.asarray(rho, dtype=np.float64)
    if rho.shape != (n, n):
        raise ConfigError(f"rho must be a scalar or an ({n}, {n}) matrix")
    if (rho < 0).any() or (rho > 1).any():
        raise ConfigError("edge appearance weights must lie in [0, 1]")
    return np.repeat(np.repeat(rho, K, axis=0), K, axis=1)


def trw_backward(m: MarginalTables, rho=1.0) -> np.ndarray:
    """Node parameters log mu_ik; edge parameters rho_ij * log of the
    pointwise dependence ratio mu_ijkl / (mu_ik mu_jl).

    Every marginal entering a logarithm must be strictly positive; see
    :func:`laplace_smooth`.
    """
    rho_g = _rho_grid(rho, m.n, m.K)
    return np.array([_trw_grid(m.grid[t], m.K, rho_g, t) for t in range(m.grid.shape[0])])


def dmrf_coordinate_indices(n: int, K: int):
    """Grid positions of the canonical coordinates, row-major upper triangle.

    Diagonal entries are the n*K node coordinates; entries with distinct
    blocks and r < c are the C(n,2)*K^2 edge coordinates.  Structural zeros
    are skipped.
    """
    nK = n * K
    r, c = np.triu_indices(nK)
    keep = (r == c) | (r // K != c // K)
    return r[keep], c[keep]


def build_intervals_dmrf(theta: np.ndarray, K: int, lam):
    """Boxes theta +- lambda_t per canonical coordinate of the block grid.

    Returns (lower, upper, (r_idx, c_idx)) with lower/upper of shape
    (P, T+1).
    """
    Tp1, nK, _ = theta.shape
    n = nK // K
    lam = np.broadcast_to(np.asarray(lam, dtype=np.float64), (Tp1,))
    r_idx, c_idx = dmrf_coordinate_indices(n, K)
    centers = theta[:, r_idx, c_idx].T  # (P, T+1)
    return centers - lam[None, :], centers + lam[None, :], (r_idx, c_idx)


def build_intervals_dmrf_streaming(
    samples,
    K: int,
    lam,
    alpha: float = 0.0,
    spec: KernelSpec | None = None,
    renormalize: bool = True,
    rho=1.0,
    dtype=np.float64,
):
    """Kernel-averaged marginals -> mapping -> boxes, one time step at a time.

    Avoids materializing all (nK, nK) marginal grids at once: raw per-time
    grids live in a ring covering the kernel band.  Intended for large
    instances; semantics match the composed non-streaming calls.
    """
    xs = [np.asarray(x) for x in samples]
    Tp1 = len(xs)
    T = Tp1 - 1
    n = xs[0].shape[1]
    nK = n * K
    counts = np.array([x.shape[0] for x in xs], dtype=np.float64)
    rho_g = _rho_grid(rho, n, K)
    node_mask, edge_mask = _block_masks(nK, K)
    r_idx, c_idx = dmrf_coordinate_indices(n, K)
    P = r_idx.shape[0]
    lower = np.empty((P, Tp1), dtype=dtype)
    upper = np.empty((P, Tp1), dtype=dtype)
    lam = np.broadcast_to(np.asarray(lam, dtype=np.float64), (Tp1,))

    if spec is None:
        half = 0
        weight_of = None
    else:
        if T < 1:
            raise ConfigError("kernel averaging needs at least two time steps")
        th = T * spec.bandwidth
        half = min(T, int(math.ceil(th)))
        weight_of = lambda d: float(spec.evaluate(d / th)) / th

    cache: dict[int, np.ndarray] = {}

    def raw(s):
        if s not in cache:
            cache[s] = _grid_at(xs[s], K, s)
        return cache[s]

    for t in range(Tp1):
        for s in list(cache):
            if s < t - half:
                del cache[s]
        if spec is None:
            g = raw(t)
        else:
            g = np.zeros((nK, nK))
            wsum = 0.0
            for s in range(max(0, t - half), min(T, t + half) + 1):
                w = weight_of(s - t)
                if w == 0.0:
                    continue
                g += w * raw(s)
                wsum += w
            if renormalize:
                g /= wsum
        if alpha > 0:
            N = counts[t]
            g = np.where(node_mask, (g * N + alpha) / (N + K * alpha), g)
            g = np.where(edge_mask, (g * N + alpha) / (N + K * K * alpha), g)
            g[~(node_mask | edge_mask)] = 0.0
        theta_t = _trw_grid(g, K, rho_g, t)
        centers = theta_t[r_idx, c_idx]
        lower[:, t] = centers - lam[t]
        upper[:, t] = centers + lam[t]
    return lower, upper, (r_idx, c_idx)

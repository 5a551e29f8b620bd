"""Kernel averaging of sufficient statistics over time.

For data-scarce regimes the per-time statistic is replaced by the weighted
average  sum_s w(s, t) phi_s  with  w(s, t) = K((s - t) / (T h)) / (T h),
where K is a symmetric kernel supported on [-1, 1] integrating to one and h
is the bandwidth.  Raw weights do not sum to one near the ends of the time
range; renormalization (the default) divides by their sum, which keeps
discrete marginals valid probabilities.  Pass ``renormalize=False`` for the
raw rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "KernelSpec",
    "TRUNC_GAUSS_NORM",
    "kernel_weights",
    "kernel_average",
    "kernel_covariance",
    "default_bandwidth",
    "stock_bandwidth",
]

# normalizer of the truncated gaussian kernel on [-1, 1]: one over the
# standard normal mass of that window, approximately 1.465
TRUNC_GAUSS_NORM = 1.0 / math.erf(1.0 / math.sqrt(2.0))

_KINDS = ("uniform", "truncated-gaussian")


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "truncated-gaussian"
    bandwidth: float = 0.25

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"kernel kind must be one of {_KINDS}, got {self.kind!r}")
        if not 0.0 < self.bandwidth <= 1.0:
            raise ConfigError(f"bandwidth must be in (0, 1], got {self.bandwidth}")

    def evaluate(self, x):
        """K(x) on [-1, 1], zero outside."""
        x = np.asarray(x, dtype=np.float64)
        inside = np.abs(x) <= 1.0
        if self.kind == "uniform":
            return np.where(inside, 0.5, 0.0)
        return np.where(inside, TRUNC_GAUSS_NORM * np.exp(-0.5 * x * x), 0.0)


def default_bandwidth(T: int) -> float:
    """h = T^(-1/4), the rate-optimal choice for the Gaussian pipeline."""
    return float(T) ** -0.25


def stock_bandwidth(T: int) -> float:
    """h = 0.02 T^(-1/3), the volatility case-study setting."""
    return 0.02 * float(T) ** (-1.0 / 3.0)


def kernel_weights(t: int, T: int, spec: KernelSpec, renormalize: bool = True) -> np.ndarray:
    """Weights w(s, t) for s = 0..T (clipped to the observed range)."""
    if T < 1:
        raise ConfigError("kernel averaging needs T >= 1")
    if not 0 <= t <= T:
        raise ConfigError(f"t must be in [0, {T}], got {t}")
    th = T * spec.bandwidth
    s = np.arange(T + 1)
    w = spec.evaluate((s - t) / th) / th
    if renormalize:
        w = w / w.sum()
    return w


def kernel_average(stats: np.ndarray, spec: KernelSpec, renormalize: bool = True) -> np.ndarray:
    """Apply the averaging along axis 0 of a (T+1, ...) statistic array.

    The kernel support is a band of half-width ceil(T h) steps, so the sweep
    costs O(T * band * statistic size).
    """
    stats = np.asarray(stats, dtype=np.float64)
    T = stats.shape[0] - 1
    if T < 1:
        raise ConfigError("kernel averaging needs at least two time steps")
    th = T * spec.bandwidth
    half = min(T, int(math.ceil(th)))
    out = np.zeros_like(stats)
    norm = np.zeros(T + 1)
    for d in range(-half, half + 1):
        w = spec.evaluate(d / th) / th
        if w == 0.0:
            continue
        src_lo, src_hi = max(0, d), T + 1 + min(0, d)
        dst_lo, dst_hi = max(0, -d), T + 1 - max(0, d)
        out[dst_lo:dst_hi] += w * stats[src_lo:src_hi]
        norm[dst_lo:dst_hi] += w
    if renormalize:
        out /= norm.reshape((-1,) + (1,) * (stats.ndim - 1))
    return out


def kernel_covariance(samples, spec: KernelSpec, renormalize: bool = True, center: bool = False):
    """Kernel-averaged second moments; returns a CovarianceSeries."""
    from .gaussian import CovarianceSeries, sample_covariance

    raw = sample_covariance(samples, center=center)
    return CovarianceSeries(kernel_average(raw.sigma, spec, renormalize), raw.counts)

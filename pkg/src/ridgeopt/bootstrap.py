"""Bias-corrected and accelerated (BCa) bootstrap intervals for a median or mean."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .genmodel import stream

# upper bound on resample-matrix entries held in memory at once
_CHUNK_ENTRIES = 4_000_000


@dataclass(frozen=True)
class CiSummary:
    method: str
    statistic: str
    point: float
    lo: float
    hi: float
    resamples: int
    confidence: float = 0.95


def _stat(name):
    if name == "median":
        return lambda a, axis=None: np.median(a, axis=axis)
    if name == "mean":
        return lambda a, axis=None: np.mean(a, axis=axis)
    raise ValueError(f"unsupported statistic {name!r}; use 'median' or 'mean'")


def jackknife_medians(values) -> np.ndarray:
    """Leave-one-out medians, O(n log n)."""
    s = np.sort(np.asarray(values, dtype=float))
    n = s.size
    i = np.arange(n)
    m = n - 1

    def at(pos):
        # element at position pos of s with index i removed
        return np.where(pos < i, s[pos], s[np.minimum(pos + 1, n - 1)])

    if m % 2 == 1:
        return at(np.full(n, (m - 1) // 2))
    return 0.5 * (at(np.full(n, m // 2 - 1)) + at(np.full(n, m // 2)))


def _jackknife(values, statistic):
    x = np.asarray(values, dtype=float)
    if statistic == "median":
        return jackknife_medians(x)
    return (x.sum() - x) / (x.size - 1)


def bootstrap_distribution(values, statistic: str, resamples: int, rng) -> np.ndarray:
    x = np.asarray(values, dtype=float)
    n = x.size
    f = _stat(statistic)
    rows = max(1, _CHUNK_ENTRIES // n)
    out = np.empty(resamples)
    for start in range(0, resamples, rows):
        stop = min(start + rows, resamples)
        idx = rng.integers(0, n, size=(stop - start, n))
        out[start:stop] = f(x[idx], axis=1)
    return out


def bca_interval(
    values,
    resamples: int = 2000,
    confidence: float = 0.95,
    rng_seed=0,
    statistic: str = "median",
    method: str = "",
) -> CiSummary:
    """BCa percentile interval for ``statistic`` of ``values``.

    Constant input gives the zero-width interval (c, c, c). The returned
    interval always contains the point estimate.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("bca_interval needs at least one value")
    point = float(_stat(statistic)(x))
    if x.size < 2 or np.all(x == x[0]):
        return CiSummary(method, statistic, point, point, point, resamples, confidence)

    boot = bootstrap_distribution(x, statistic, resamples, stream(rng_seed))
    below = np.mean(boot < point) + 0.5 * np.mean(boot == point)
    below = np.clip(below, 0.5 / resamples, 1 - 0.5 / resamples)
    z0 = norm.ppf(below)

    jack = _jackknife(x, statistic)
    dev = jack.mean() - jack
    # acceleration is scale free; normalise so tiny spreads cannot underflow
    spread = np.max(np.abs(dev))
    dev = dev / spread if spread > 0 else dev
    ss = np.sum(dev**2)
    accel = np.sum(dev**3) / (6.0 * ss**1.5) if ss > 0 else 0.0

    alpha = 1.0 - confidence
    z = norm.ppf([alpha / 2, 1 - alpha / 2])
    adj = norm.cdf(z0 + (z0 + z) / (1 - accel * (z0 + z)))
    lo, hi = np.quantile(boot, adj)
    return CiSummary(
        method, statistic, point, float(min(lo, point)), float(max(hi, point)), resamples, confidence
    )

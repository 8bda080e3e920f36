"""Distribution distances, cumulants and power-law rate fitting.

The matrix-level Wasserstein distances of the limit theorems have no
tractable estimator at desk scale, so empirical verification runs on
(i) one-dimensional entrywise Wasserstein distances via order statistics,
(ii) cross-moment checks of the half-matrix covariance and (iii) the decay
of exactly computable variance gaps, fitted on a log-log scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import ndtri

from .errors import DomainError, FitError

__all__ = [
    "RateFit",
    "Cumulants",
    "wasserstein1_empirical",
    "w1_to_gaussian",
    "cumulants",
    "fit_power_law",
    "bootstrap_ci",
]


def wasserstein1_empirical(a, b) -> float:
    """Empirical 1-Wasserstein distance between two real samples.

    For equal sizes this is the mean absolute difference of order
    statistics; unequal sizes are first resampled onto a common quantile
    grid of size max(len(a), len(b)) (linear interpolation of order
    statistics). Zero iff the sorted samples coincide.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size < 2 or b.size < 2:
        raise DomainError("samples must have at least 2 points")
    if a.size != b.size:
        m = max(a.size, b.size)
        q = (np.arange(m) + 0.5) / m
        a = np.quantile(a, q)
        b = np.quantile(b, q)
    else:
        a = np.sort(a)
        b = np.sort(b)
    return float(np.mean(np.abs(a - b)))


def w1_to_gaussian(sample, mean: float, var: float) -> float:
    """W1 distance from a sample to N(mean, var) by quantile coupling.

    The Gaussian quantile function is evaluated at the plotting positions
    (i - 1/2)/N and compared with the sorted sample.
    """
    sample = np.asarray(sample, dtype=float).ravel()
    if sample.size < 100:
        raise DomainError(f"need at least 100 points, got {sample.size}")
    if var <= 0.0:
        raise DomainError(f"var must be positive, got {var}")
    n = sample.size
    q = ndtri((np.arange(n) + 0.5) / n) * math.sqrt(var) + mean
    return float(np.mean(np.abs(np.sort(sample) - q)))


class Cumulants(NamedTuple):
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float


def cumulants(sample) -> Cumulants:
    """Sample mean, unbiased variance, skewness and excess kurtosis.

    Skewness and kurtosis use plain central moments: skew = m3 / m2^(3/2)
    and excess kurtosis = m4 / m2^2 - 3.
    """
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 8:
        raise DomainError(f"need at least 8 points, got {x.size}")
    mean = float(np.mean(x))
    c = x - mean
    m2 = float(np.mean(c * c))
    if m2 == 0.0:
        raise DomainError("zero variance: skewness/kurtosis undefined")
    m3 = float(np.mean(c**3))
    m4 = float(np.mean(c**4))
    return Cumulants(
        mean=mean,
        variance=float(np.var(x, ddof=1)),
        skewness=m3 / m2**1.5,
        excess_kurtosis=m4 / (m2 * m2) - 3.0,
    )


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit of log(value) = intercept + slope * log(d)."""

    pairs: tuple
    slope: float
    intercept: float
    r2: float

    def to_csv(self, path, header_comment: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(header_comment.rstrip("\n") + "\n")
            fh.write("d,value,slope,intercept,r2\n")
            for d, v in self.pairs:
                fh.write(
                    f"{d},{v:.17g},{self.slope:.17g},"
                    f"{self.intercept:.17g},{self.r2:.17g}\n"
                )


def fit_power_law(pairs: Sequence[tuple]) -> RateFit:
    """Fit value ~ C * d^slope on (d, value) pairs, d increasing, value > 0."""
    ds = np.array([p[0] for p in pairs], dtype=float)
    vs = np.array([p[1] for p in pairs], dtype=float)
    if ds.size < 3:
        raise FitError("need at least 3 points")
    if np.any(np.diff(ds) <= 0):
        raise FitError("d values must be strictly increasing")
    if np.any(vs <= 0.0):
        raise DomainError("values must be positive for a log-log fit")
    lx, ly = np.log(ds), np.log(vs)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (intercept + slope * lx)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return RateFit(
        pairs=tuple((int(d), float(v)) for d, v in zip(ds, vs)),
        slope=float(slope),
        intercept=float(intercept),
        r2=float(r2),
    )


def bootstrap_ci(
    sample,
    statistic,
    n_boot: int = 1000,
    level: float = 0.95,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Percentile bootstrap confidence interval for a sample statistic."""
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 8:
        raise DomainError(f"need at least 8 points, got {x.size}")
    if rng is None:
        rng = np.random.default_rng(0)
    stats = np.empty(n_boot)
    for b in range(n_boot):
        stats[b] = statistic(x[rng.integers(0, x.size, x.size)])
    lo = (1.0 - level) / 2.0
    return float(np.quantile(stats, lo)), float(np.quantile(stats, 1.0 - lo))

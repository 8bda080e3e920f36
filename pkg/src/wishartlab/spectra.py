"""Eigenvalues, empirical spectral moments and semicircle references.

Convergence of the empirical spectral distribution is checked through its
moments: the k-th ESD moment of M is (1/n) sum (lambda_i / sqrt(n))^k and
the semicircle law with variance t has even moments t^j * Catalan(j) (odd
moments vanish). Moments are robust at the matrix sizes this package runs
at (n around a few hundred), where distribution-distance statistics are
dominated by edge noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "SpectralSummary",
    "eigenvalues",
    "esd_moments",
    "semicircle_moment",
    "semicircle_density",
    "moment_distance",
    "esd_histogram",
]

#: fixed histogram layout: 101 bins over [-2.5 sqrt(t), 2.5 sqrt(t)], wide
#: enough that finite-n spill past the semicircle support is captured.
HIST_BINS = 101
HIST_HALF_WIDTH = 2.5


def eigenvalues(M: np.ndarray) -> np.ndarray:
    """Full real spectrum of a symmetric matrix, ascending.

    Uses a symmetric (tridiagonalization-class) eigensolver; input must be
    symmetric within 1e-10 relative to its largest entry.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError("expected a square matrix")
    tol = 1e-10 * max(1.0, float(np.max(np.abs(M))) if M.size else 1.0)
    if float(np.max(np.abs(M - M.T))) > tol:
        raise DomainError("matrix is not symmetric within tolerance")
    return np.linalg.eigvalsh(M)


@dataclass(frozen=True)
class SpectralSummary:
    """Eigenvalues of M / sqrt(n) and the ESD moments m_1 .. m_kmax."""

    n: int
    eigenvalues: np.ndarray = field(repr=False)
    moments: np.ndarray

    def moment(self, k: int) -> float:
        return float(self.moments[k - 1])


def esd_moments(M: np.ndarray, kmax: int) -> SpectralSummary:
    """Empirical spectral moments m_k = (1/n) sum (lambda_i/sqrt(n))^k."""
    if kmax < 2:
        raise DomainError(f"kmax must be >= 2, got {kmax}")
    lam = eigenvalues(M)
    n = lam.size
    scaled = lam / math.sqrt(n)
    moments = np.array([float(np.mean(scaled**k)) for k in range(1, kmax + 1)])
    return SpectralSummary(n=n, eigenvalues=scaled, moments=moments)


def semicircle_moment(t: float, k: int) -> float:
    """k-th moment of the semicircle law with variance t.

    Odd moments vanish; m_{2j} = t^j * Catalan(j) with Catalan(j) =
    binom(2j, j) / (j + 1).
    """
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if k % 2 == 1:
        return 0.0
    j = k // 2
    return t**j * math.comb(2 * j, j) / (j + 1)


def semicircle_density(t: float, x):
    """Density (1 / (2 pi t)) sqrt((4t - x^2)_+); integrates to 1."""
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    out = np.sqrt(np.maximum(4.0 * t - x * x, 0.0)) / (2.0 * math.pi * t)
    return out if out.ndim else float(out)


def moment_distance(summary: SpectralSummary, t: float, kmax: int) -> float:
    """max_{k <= kmax} |m_k - semicircle moment| / max(1, semicircle moment)."""
    if kmax % 2 != 0 or kmax < 4:
        raise DomainError(f"kmax must be even and >= 4, got {kmax}")
    if kmax > summary.moments.size:
        raise DomainError("summary holds fewer moments than kmax")
    worst = 0.0
    for k in range(1, kmax + 1):
        ref = semicircle_moment(t, k)
        err = abs(summary.moment(k) - ref) / max(1.0, ref)
        worst = max(worst, err)
    return worst


def esd_histogram(summary: SpectralSummary, t: float):
    """Fixed-layout histogram of the scaled eigenvalues.

    Returns (bin_left, bin_right, count) arrays over 101 equal bins spanning
    [-2.5 sqrt(t), 2.5 sqrt(t)].
    """
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    half = HIST_HALF_WIDTH * math.sqrt(t)
    edges = np.linspace(-half, half, HIST_BINS + 1)
    counts, _ = np.histogram(summary.eigenvalues, bins=edges)
    return edges[:-1], edges[1:], counts

"""Covariance kernels of the supported self-similar Gaussian processes.

Implements the three concrete process families used throughout the package
(fractional, bi-fractional and sub-fractional Brownian motion), their exact
covariance functions and mixed partial derivatives, and the derived regime
parameters that control the high-dimensional behaviour of Wishart matrices
built from their normalized increments.

Every process here is centered Gaussian and exactly self-similar,

    E[X(c s) X(c t)] = c**(2 beta) * E[X(s) X(t)]    for all c > 0,

so the covariance is characterized by ``phi(x) = E[X_1 X_x]`` for x >= 1.
For each family phi splits into a power-law singular part and a smooth
remainder,

    phi(x) = -lam * (x - 1)**alpha + psi(x),

with psi twice differentiable. The exponent ``alpha`` in (0, 2) governs the
decay of increment correlations and selects the asymptotic regime of the
associated Wishart matrices:

* ``alpha < 3/2``   central regime (Gaussian orthogonal ensemble limit),
* ``alpha = 3/2``   central regime with an extra logarithmic normalization,
* ``alpha > 3/2``   non-central regime (second-chaos limit).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, FitError

__all__ = [
    "ProcessKind",
    "Regime",
    "ProcessSpec",
    "RegimeParams",
    "HypothesisDiagnostics",
    "covariance",
    "mixed_partial",
    "mixed_partial_fd",
    "derive_regime_params",
    "regime_for_alpha",
    "hypothesis_diagnostics",
]

#: alpha values within this distance of 3/2 are treated as the log regime.
LOG_ALPHA_TOL = 1e-12


class ProcessKind(str, enum.Enum):
    FBM = "fbm"
    BIFBM = "bifbm"
    SUBFBM = "subfbm"


class Regime(str, enum.Enum):
    CENTRAL = "central"
    LOG = "log"
    NONCENTRAL = "noncentral"


@dataclass(frozen=True)
class ProcessSpec:
    """A member of the supported process family.

    Parameters
    ----------
    kind : ProcessKind
        One of FBM, BIFBM, SUBFBM (string aliases accepted).
    hurst : float
        Hurst parameter H in (0, 1).
    bifractional : float, default 1.0
        Second parameter K in (0, 1]; only used by BIFBM (BIFBM with K = 1
        coincides with FBM).

    Derived attributes
    ------------------
    alpha : increment regularity exponent; equals 2*H*K for BIFBM and 2*H
        otherwise.
    beta : self-similarity index, always alpha / 2 for these kernels.
    nu : long-range decay exponent of phi'; only meaningful when alpha < 1.
    lam : coefficient of the (x-1)**alpha singular part of phi.
    """

    kind: ProcessKind
    hurst: float
    bifractional: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ProcessKind(self.kind))
        if not 0.0 < self.hurst < 1.0:
            raise DomainError(f"hurst must lie in (0, 1), got {self.hurst}")
        if not 0.0 < self.bifractional <= 1.0:
            raise DomainError(
                f"bifractional K must lie in (0, 1], got {self.bifractional}"
            )

    @property
    def alpha(self) -> float:
        if self.kind is ProcessKind.BIFBM:
            return 2.0 * self.hurst * self.bifractional
        return 2.0 * self.hurst

    @property
    def beta(self) -> float:
        if self.kind is ProcessKind.BIFBM:
            return self.hurst * self.bifractional
        return self.hurst

    @property
    def nu(self) -> float:
        if self.kind is ProcessKind.BIFBM:
            h, k = self.hurst, self.bifractional
            return min(1.0 + 2.0 * h - 2.0 * h * k, 2.0 - 2.0 * h * k)
        return 2.0 - 2.0 * self.hurst

    @property
    def lam(self) -> float:
        if self.kind is ProcessKind.BIFBM:
            return 2.0 ** (-self.bifractional)
        return 0.5

    def label(self) -> str:
        if self.kind is ProcessKind.BIFBM:
            return f"bifbm(H={self.hurst:g}, K={self.bifractional:g})"
        return f"{self.kind.value}(H={self.hurst:g})"


class RegimeParams(NamedTuple):
    alpha: float
    beta: float
    nu: float
    lam: float
    regime: Regime


def _as_positive_times(s, t):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s <= 0.0) or np.any(t <= 0.0):
        raise DomainError("time arguments must be strictly positive")
    return s, t


def covariance(spec: ProcessSpec, s, t):
    """Exact covariance E[X_s X_t] of the process; vectorized over s, t.

    The three kernels:

    * FBM:    (s**2H + t**2H - |t-s|**2H) / 2
    * BIFBM:  2**(-K) * ((t**2H + s**2H)**K - |t-s|**(2HK))
    * SUBFBM: t**2H + s**2H - ((t+s)**2H + |t-s|**2H) / 2

    Raises
    ------
    DomainError
        If any time is nonpositive.
    """
    s, t = _as_positive_times(s, t)
    h2 = 2.0 * spec.hurst
    if spec.kind is ProcessKind.FBM:
        out = 0.5 * (s**h2 + t**h2 - np.abs(t - s) ** h2)
    elif spec.kind is ProcessKind.SUBFBM:
        out = s**h2 + t**h2 - 0.5 * ((t + s) ** h2 + np.abs(t - s) ** h2)
    else:
        k = spec.bifractional
        out = 2.0 ** (-k) * ((t**h2 + s**h2) ** k - np.abs(t - s) ** (h2 * k))
    return out if out.ndim else float(out)


def mixed_partial(spec: ProcessSpec, s, t):
    """Analytic mixed partial derivative d^2/(ds dt) E[X_s X_t], s != t.

    Hand-derived per kernel; cross-checked against :func:`mixed_partial_fd`
    in the test suite. The diagonal s = t is a genuine singularity of the
    kernel and is rejected.
    """
    s, t = _as_positive_times(s, t)
    if np.any(s == t):
        raise DomainError("mixed_partial is singular on the diagonal s = t")
    h = spec.hurst
    if spec.kind is ProcessKind.FBM:
        out = h * (2 * h - 1) * np.abs(t - s) ** (2 * h - 2)
    elif spec.kind is ProcessKind.SUBFBM:
        out = h * (2 * h - 1) * (
            np.abs(t - s) ** (2 * h - 2) - (t + s) ** (2 * h - 2)
        )
    else:
        k = spec.bifractional
        hk2 = 2 * h * k
        smooth = (
            4 * h * h * k * (k - 1)
            * (s * t) ** (2 * h - 1)
            * (t ** (2 * h) + s ** (2 * h)) ** (k - 2)
        )
        singular = hk2 * (hk2 - 1) * np.abs(t - s) ** (hk2 - 2)
        out = 2.0 ** (-k) * (smooth + singular)
    return out if out.ndim else float(out)


def mixed_partial_fd(spec: ProcessSpec, s, t, step: float = 1e-5):
    """Central finite-difference estimate of the mixed partial (testing aid).

    Evaluated in extended precision: the cross difference cancels ~10
    digits at step 1e-5, which float64 cannot absorb at the 1e-6 relative
    accuracy this oracle is held to.
    """
    s, t = _as_positive_times(s, t)
    s = s.astype(np.longdouble)
    t = t.astype(np.longdouble)
    h = np.longdouble(step)
    c = covariance
    out = (
        c(spec, s + h, t + h)
        - c(spec, s + h, t - h)
        - c(spec, s - h, t + h)
        + c(spec, s - h, t - h)
    ) / (4.0 * h * h)
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


def regime_for_alpha(alpha: float) -> Regime:
    """Asymptotic regime selected by alpha; rejects alpha outside (0, 2)."""
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha = {alpha} has no supported regime")
    if abs(alpha - 1.5) <= LOG_ALPHA_TOL:
        return Regime.LOG
    return Regime.CENTRAL if alpha < 1.5 else Regime.NONCENTRAL


def derive_regime_params(spec: ProcessSpec) -> RegimeParams:
    """Regime parameters (alpha, beta, nu, lam) and the asymptotic regime tag.

    Raises
    ------
    DomainError
        If alpha >= 2 (no supported asymptotic regime).
    """
    return RegimeParams(
        spec.alpha, spec.beta, spec.nu, spec.lam, regime_for_alpha(spec.alpha)
    )


@dataclass(frozen=True)
class HypothesisDiagnostics:
    """Numeric sanity report for the power-law structure of phi.

    ``phi1_fitted``/``phi2_fitted`` are log-log decay exponents of |phi'| and
    |phi''| fitted on the supplied grid; the targets are the nominal decay
    exponents (-nu, -nu-1 when alpha < 1, else alpha-2, alpha-3). The targets
    are order-of-magnitude envelopes, not exact asymptotics: smooth-part
    cancellations can make the true decay strictly faster (sub-fractional
    kernels do exactly that), so fitted and target values need not agree.

    ``lambda_hat`` estimates the singularity coefficient lam from second
    differences of phi at 1+; it is NaN when alpha = 1, where the singular
    part is linear and not identifiable from phi.
    """

    phi1_fitted: float
    phi1_target: float
    phi2_fitted: float
    phi2_target: float
    lambda_hat: float
    lambda_derived: float


def _phi(spec: ProcessSpec, x):
    return covariance(spec, 1.0, x)


def hypothesis_diagnostics(spec: ProcessSpec, xgrid) -> HypothesisDiagnostics:
    """Fit the decay exponents of |phi'|, |phi''| and estimate lam.

    Parameters
    ----------
    xgrid : array_like
        Evaluation points, all >= 2, at least 8 of them, spanning at least a
        decade in x - 1.
    """
    x = np.sort(np.asarray(xgrid, dtype=float))
    if x.size < 8:
        raise FitError("need at least 8 grid points")
    if np.any(x < 2.0):
        raise DomainError("diagnostic grid points must be >= 2")
    if (x[-1] - 1.0) < 10.0 * (x[0] - 1.0):
        raise FitError("diagnostic grid must span at least a decade in x - 1")

    alpha, nu = spec.alpha, spec.nu

    h1 = 1e-4 * x
    phi1 = (_phi(spec, x + h1) - _phi(spec, x - h1)) / (2.0 * h1)
    h2 = 1e-3 * x
    phi2 = (_phi(spec, x + h2) - 2.0 * _phi(spec, x) + _phi(spec, x - h2)) / (
        h2 * h2
    )
    if np.any(phi1 == 0.0) or np.any(phi2 == 0.0):
        raise FitError("derivative vanished on the grid; cannot fit a decay")
    logx = np.log(x - 1.0)
    slope1 = np.polyfit(logx, np.log(np.abs(phi1)), 1)[0]
    slope2 = np.polyfit(logx, np.log(np.abs(phi2)), 1)[0]

    target1 = -nu if alpha < 1.0 else alpha - 2.0
    target2 = -nu - 1.0 if alpha < 1.0 else alpha - 3.0

    lam_hat = _fit_lambda(spec, alpha)

    return HypothesisDiagnostics(
        phi1_fitted=float(slope1),
        phi1_target=float(target1),
        phi2_fitted=float(slope2),
        phi2_target=float(target2),
        lambda_hat=lam_hat,
        lambda_derived=spec.lam,
    )


def _fit_lambda(spec: ProcessSpec, alpha: float) -> float:
    # Second differences of phi at 1+ kill psi to O(h^2):
    #   phi(1+2h) - 2 phi(1+h) + phi(1) = -lam (2^alpha - 2) h^alpha + O(h^2),
    # so y(h) = g(h) / (-(2^alpha - 2) h^alpha) = lam + O(h^(2-alpha)) and a
    # two-term regression on {1, h^(2-alpha)} recovers lam. At alpha = 1 the
    # prefactor vanishes (the singular part is linear) and lam is not
    # identifiable from phi alone.
    if abs(alpha - 1.0) < 1e-9:
        return math.nan
    hs = np.geomspace(1e-5, 1e-2, 40)
    g = _phi(spec, 1.0 + 2.0 * hs) - 2.0 * _phi(spec, 1.0 + hs) + _phi(spec, 1.0)
    y = g / (-(2.0**alpha - 2.0) * hs**alpha)
    basis = np.column_stack([np.ones_like(hs), hs ** (2.0 - alpha)])
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return float(coef[0])

"""Exact increment-correlation matrices and closed-form limit quantities.

The central object is delta, the correlation matrix of the normalized unit
increments Y_k = (X_{k+1} - X_k) / ||X_{k+1} - X_k||_L2 of one process copy.
Everything the asymptotic theory needs is a functional of delta:

* ``regime_variance``    exact entry variance of the renormalized Wishart
  matrix at finite d (per regime normalization),
* ``sigma2_series`` / ``sigma2_extrapolated``   two routes to the limiting
  central-regime variance (series formula vs. numeric extrapolation),
* ``rho2_limit``         the closed-form limit 9x/32 in the log regime,
* ``quartic_contraction``  trace(delta^4), the quantity controlling fourth
  cumulants and hence the central-limit rates,
* ``rate_bound``         the five-case Wasserstein decay-rate bound,
* ``rosenblatt_variance`` the limiting entry variance in the non-central
  regime, computed by singularity-splitting quadrature,
* ``increment_l2_gap``   exact L2 modulus of the matrix trajectory in the
  indexing parameter x.

Increments are indexed k = 1..D (time 0 never enters). Two grids are
supported: UNIT uses times k..k+1 and FINE(d) uses times k/d..(k+1)/d. For
exactly self-similar processes the two grids give identical correlation
matrices; both are kept so the finite-d objects can be formed on the grid
they are defined on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ContractError, DomainError, FitError, NumericError
from .kernels import (
    ProcessKind,
    ProcessSpec,
    Regime,
    covariance,
    derive_regime_params,
    mixed_partial,
    regime_for_alpha,
)

__all__ = [
    "Grid",
    "DeltaMatrix",
    "RateBound",
    "Sigma2Series",
    "Sigma2Extrapolated",
    "a_alpha",
    "floor_index",
    "increment_cov",
    "increment_sd",
    "delta_block",
    "delta_sq_range_sum",
    "delta_matrix",
    "regime_variance",
    "sigma2_series",
    "sigma2_extrapolated",
    "rho2_limit",
    "quartic_contraction",
    "rate_bound",
    "rosenblatt_variance",
    "increment_l2_gap",
]

#: PSD slack allowed for correlation matrices (relative to unit diagonal).
PSD_TOL = 1e-8

#: largest D for which delta_matrix checks definiteness by default.
PSD_AUTO_MAX_D = 1024


class Grid(str, enum.Enum):
    UNIT = "unit"
    FINE = "fine"


def floor_index(v: float) -> int:
    """floor(v) robust to values that are an ulp shy of an integer."""
    r = round(v)
    if abs(v - r) < 1e-9:
        return int(r)
    return int(math.floor(v))


def a_alpha(alpha: float, m):
    """Second difference a_alpha(m) = (|m+1|^a + |m-1|^a - 2|m|^a) / 2.

    This is the autocovariance shape of normalized stationary increments
    with regularity exponent alpha; it is even in m, equals 1 at m = 0 and
    decays like alpha*(alpha-1)/2 * m**(alpha-2).
    """
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    m = np.asarray(m, dtype=float)
    out = 0.5 * (
        np.abs(m + 1.0) ** alpha + np.abs(m - 1.0) ** alpha - 2.0 * np.abs(m) ** alpha
    )
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# increment covariances
# ---------------------------------------------------------------------------

def _grid_times(idx, grid: Grid, d):
    idx = np.asarray(idx, dtype=float)
    if grid is Grid.UNIT:
        return idx
    if d is None:
        raise ContractError("FINE grid requires the fine-grid divisor d")
    return idx / float(d)


def increment_cov(spec: ProcessSpec, k, l, grid: Grid = Grid.UNIT, d=None):
    """E[(X_{t_{k+1}} - X_{t_k})(X_{t_{l+1}} - X_{t_l})], broadcast over k, l.

    Computed through the four-point identity

        cov(k+1, l+1) - cov(k, l+1) - cov(k+1, l) + cov(k, l),

    with closed-form shortcuts for the stationary-increment (FBM) and
    Toeplitz-plus-Hankel (SUBFBM) structures on the unit grid.
    """
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    if grid is Grid.UNIT:
        alpha = spec.alpha
        if spec.kind is ProcessKind.FBM:
            return a_alpha(alpha, k - l)
        if spec.kind is ProcessKind.SUBFBM:
            return a_alpha(alpha, k - l) - a_alpha(alpha, k + l + 1.0)
    tk = _grid_times(k, grid, d)
    tl = _grid_times(l, grid, d)
    step = 1.0 if grid is Grid.UNIT else 1.0 / float(d)
    return (
        covariance(spec, tk + step, tl + step)
        - covariance(spec, tk, tl + step)
        - covariance(spec, tk + step, tl)
        + covariance(spec, tk, tl)
    )


def increment_sd(spec: ProcessSpec, idx, grid: Grid = Grid.UNIT, d=None):
    """Exact L2 norms of the increments at the given 1-based indices."""
    idx = np.asarray(idx, dtype=float)
    var = increment_cov(spec, idx, idx, grid, d)
    var = np.asarray(var, dtype=float)
    if np.any(var <= 0.0):
        raise NumericError("nonpositive increment variance on the grid")
    return np.sqrt(var)


def delta_block(spec: ProcessSpec, k_idx, l_idx, grid: Grid = Grid.UNIT, d=None):
    """Block of the normalized increment correlation matrix delta."""
    k_idx = np.asarray(k_idx)
    l_idx = np.asarray(l_idx)
    cov = increment_cov(spec, k_idx[:, None], l_idx[None, :], grid, d)
    sk = increment_sd(spec, k_idx, grid, d)
    sl = increment_sd(spec, l_idx, grid, d)
    return cov / (sk[:, None] * sl[None, :])


def delta_sq_range_sum(
    spec: ProcessSpec,
    lo: int,
    hi: int,
    grid: Grid = Grid.UNIT,
    d=None,
    block: int = 512,
) -> float:
    """Sum of delta_kl**2 over lo <= k, l <= hi without storing the matrix.

    Memory stays O(block * (hi - lo)); used for the large-D variance and
    modulus sums where the full matrix would not fit.
    """
    if hi < lo:
        return 0.0
    idx = np.arange(lo, hi + 1)
    sd = increment_sd(spec, idx, grid, d)
    total = 0.0
    for start in range(0, idx.size, block):
        kchunk = idx[start : start + block]
        cov = increment_cov(spec, kchunk[:, None], idx[None, :], grid, d)
        cov /= sd[start : start + kchunk.size, None]
        cov /= sd[None, :]
        total += float(np.sum(cov * cov))
    return total


# ---------------------------------------------------------------------------
# DeltaMatrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeltaMatrix:
    """Exact correlation matrix of the first D normalized increments.

    values[k-1, l-1] = corr(Y_k, Y_l); unit diagonal, entries in [-1, 1],
    positive semidefinite up to -1e-8.
    """

    spec: ProcessSpec
    D: int
    grid: Grid
    d: int | None
    values: np.ndarray = field(repr=False)

    def to_csv(self, path) -> None:
        """Write as CSV: header line ``D,grid,d`` then the row-major matrix."""
        with open(path, "w", newline="") as fh:
            fh.write("D,grid,d\n")
            fh.write(f"{self.D},{self.grid.value},{self.d or 0}\n")
            for row in self.values:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @staticmethod
    def read_csv(path, spec: ProcessSpec) -> "DeltaMatrix":
        with open(path) as fh:
            header = fh.readline().strip()
            if header != "D,grid,d":
                raise DomainError(f"unexpected delta CSV header {header!r}")
            dd, gg, dv = fh.readline().strip().split(",")
            values = np.loadtxt(fh, delimiter=",", ndmin=2)
        d = int(dv) or None
        return DeltaMatrix(spec, int(dd), Grid(gg), d, values)


def delta_matrix(
    spec: ProcessSpec,
    D: int,
    grid: Grid = Grid.UNIT,
    d=None,
    check_psd="auto",
    block: int = 512,
) -> DeltaMatrix:
    """Construct the D x D correlation matrix of normalized increments.

    Parameters
    ----------
    D : int
        Number of increments (columns), at least 2.
    grid : Grid
        UNIT (times k..k+1) or FINE (times k/d..(k+1)/d).
    d : int, optional
        Fine-grid divisor; required for FINE and must satisfy d >= D.
    check_psd : "auto" | bool
        Definiteness validation. "auto" checks only for D <= 1024 (the
        check costs a Cholesky); the matrix is PSD by construction, the
        check guards against catastrophic rounding.

    Raises
    ------
    NumericError
        If the matrix fails the PSD check beyond the -1e-8 tolerance.
    """
    if D < 2:
        raise DomainError(f"D must be >= 2, got {D}")
    if grid is Grid.FINE:
        if d is None:
            raise ContractError("FINE grid requires d")
        if d < D:
            raise ContractError(f"FINE grid requires d >= D, got d={d}, D={D}")
    else:
        d = None
    idx = np.arange(1, D + 1)
    sd = increment_sd(spec, idx, grid, d)
    values = np.empty((D, D))
    for start in range(0, D, block):
        kchunk = idx[start : start + block]
        cov = increment_cov(spec, kchunk[:, None], idx[None, :], grid, d)
        values[start : start + kchunk.size] = cov / (
            sd[start : start + kchunk.size, None] * sd[None, :]
        )
    np.fill_diagonal(values, 1.0)

    overshoot = np.max(np.abs(values)) - 1.0
    if overshoot > 1e-8:
        raise NumericError(f"correlation magnitude exceeds 1 by {overshoot:.3e}")
    np.clip(values, -1.0, 1.0, out=values)

    if check_psd is True or (check_psd == "auto" and D <= PSD_AUTO_MAX_D):
        try:
            np.linalg.cholesky(values + PSD_TOL * np.eye(D))
        except np.linalg.LinAlgError:
            wmin = float(np.linalg.eigvalsh(values)[0])
            raise NumericError(
                f"increment correlation matrix is not PSD: min eigenvalue {wmin:.3e}"
            ) from None
    return DeltaMatrix(spec, D, grid, d, values)


# ---------------------------------------------------------------------------
# variances and limits
# ---------------------------------------------------------------------------

def _regime_scale(regime: Regime, d: int, alpha: float) -> float:
    if regime is Regime.CENTRAL:
        return 1.0 / d
    if regime is Regime.LOG:
        return 1.0 / (d * math.log(d))
    return float(d) ** (2.0 - 2.0 * alpha)


def regime_variance(delta: DeltaMatrix, d: int, regime: Regime) -> float:
    """Exact variance of the off-diagonal Wishart entries at finite d.

    CENTRAL: (1/d) sum delta^2; LOG: (1/(d ln d)) sum delta^2; NONCENTRAL:
    d^(2-2 alpha) sum delta^2 with delta formed on the fine grid. Diagonal
    entries have exactly twice this variance.
    """
    regime = Regime(regime)
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    if regime is Regime.NONCENTRAL:
        if delta.grid is not Grid.FINE:
            raise ContractError("NONCENTRAL variance needs a FINE-grid delta")
        if delta.d != d:
            raise ContractError(f"delta built for d={delta.d}, asked for d={d}")
    elif delta.grid is not Grid.UNIT:
        raise ContractError(f"{regime.value} variance needs a UNIT-grid delta")
    sq = float(np.sum(delta.values * delta.values))
    return _regime_scale(regime, d, delta.spec.alpha) * sq


class Sigma2Series(NamedTuple):
    value: float
    tail_bound: float


def sigma2_series(alpha: float, x: float, M: int) -> Sigma2Series:
    """Truncated series (x/2) * sum_{|m| <= M} a_alpha(m)**2 with tail bound.

    This is the stated closed-form limit of the central-regime variance.
    Note it carries an x/2 prefactor while the direct normalized sums
    converge to x * sum a_alpha(m)^2 (see ``sigma2_extrapolated``, which is
    the authoritative oracle); both are reported so the conventions can be
    compared. Requires alpha < 3/2 for convergence.
    """
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    if alpha >= 1.5:
        raise DomainError(f"series diverges for alpha = {alpha} >= 3/2")
    if x < 0.0:
        raise DomainError("x must be nonnegative")
    if M < 1:
        raise DomainError("truncation radius M must be >= 1")
    m = np.arange(1, M + 1)
    a = a_alpha(alpha, m)
    total = 1.0 + 2.0 * float(np.sum(a * a))
    # |a_alpha(m)| <= (alpha|alpha-1|/2) (m-1)^(alpha-2) for m >= 2, hence an
    # integral bound on both tails; exact zero at alpha = 1.
    c = alpha * abs(alpha - 1.0) / 2.0
    if c == 0.0:
        tail = 0.0
    elif M < 2:
        tail = math.inf
    else:
        tail = x * c * c * (M - 1.0) ** (2.0 * alpha - 3.0) / (3.0 - 2.0 * alpha)
    return Sigma2Series(value=0.5 * x * total, tail_bound=tail)


@dataclass(frozen=True)
class Sigma2Extrapolated:
    """d -> infinity extrapolation of the exact regime variance.

    ``sequence`` holds the raw (d, variance) pairs; ``ok`` is False when the
    fitted limit is unreliable (non-finite or dominated by the residual), in
    which case the raw sequence is the usable output.
    """

    value: float
    residual: float
    sequence: tuple
    regime: Regime
    ok: bool


def sigma2_extrapolated(
    spec: ProcessSpec, x: float, d_list: Sequence[int]
) -> Sigma2Extrapolated:
    """Fit value(d) = sigma2_inf + c * r(d) on exact finite-d variances.

    r(d) = d**max(2 alpha - 3, -1) in the central regime and 1/ln d in the
    log regime. Serves as the numeric oracle for the limiting variance.
    """
    ds = [int(d) for d in d_list]
    if len(ds) < 3:
        raise FitError("need at least 3 values of d")
    if any(b <= a for a, b in zip(ds, ds[1:])):
        raise FitError("d_list must be strictly increasing")
    if ds[-1] < 4096:
        raise FitError("largest d must be >= 4096 for a stable extrapolation")
    if x <= 0.0:
        raise DomainError("x must be positive")
    params = derive_regime_params(spec)
    if params.regime is Regime.NONCENTRAL:
        raise DomainError(
            "no finite central-regime variance limit for alpha > 3/2"
        )
    vals = []
    for d in ds:
        D = floor_index(d * x)
        if D < 2:
            raise DomainError(f"floor(d*x) = {D} < 2 at d = {d}")
        sq = delta_sq_range_sum(spec, 1, D)
        vals.append(_regime_scale(params.regime, d, params.alpha) * sq)
    vals = np.asarray(vals)
    darr = np.asarray(ds, dtype=float)
    if params.regime is Regime.LOG:
        reg = 1.0 / np.log(darr)
    else:
        reg = darr ** max(2.0 * params.alpha - 3.0, -1.0)
    basis = np.column_stack([np.ones_like(reg), reg])
    coef, *_ = np.linalg.lstsq(basis, vals, rcond=None)
    fitted = basis @ coef
    residual = float(np.max(np.abs(fitted - vals)))
    value = float(coef[0])
    ok = math.isfinite(value) and (value > 0.0) and residual <= 0.1 * abs(value)
    return Sigma2Extrapolated(
        value=value,
        residual=residual,
        sequence=tuple(zip(ds, vals.tolist())),
        regime=params.regime,
        ok=ok,
    )


def rho2_limit(x: float) -> float:
    """Limiting off-diagonal entry variance 9x/32 in the log regime."""
    if x <= 0.0:
        raise DomainError("x must be positive")
    return 9.0 * x / 32.0


def quartic_contraction(delta) -> float:
    """trace(delta^4) = sum_{k,l,m,p} delta_kl delta_mp delta_km delta_lp.

    Computed as the squared Frobenius norm of delta^2 (O(D^3)); always
    nonnegative for symmetric input.
    """
    values = delta.values if isinstance(delta, DeltaMatrix) else np.asarray(delta)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise DomainError("expected a square matrix")
    if not np.allclose(values, values.T, atol=1e-10 * max(1.0, np.max(np.abs(values)))):
        raise DomainError("expected a symmetric matrix")
    m2 = values @ values
    return float(np.sum(m2 * m2))


# ---------------------------------------------------------------------------
# rate bounds
# ---------------------------------------------------------------------------

ALPHA_QUARTER_TOL = 1e-12


@dataclass(frozen=True)
class RateBound:
    """Normalized Wasserstein-distance bound (unknown constant set to 1).

    ``branch`` names the decay-rate case; central-regime bounds compose as
    n^(3/2) r + n d^(2 alpha - 3) + n / d, the log regime gives
    n^(3/2)/ln d and the non-central regime n d^((3-2 alpha)/2).
    """

    alpha: float
    nu: float
    n: int
    d: int
    r_value: float
    total_bound: float
    branch: str
    regime: Regime


def rate_bound(alpha: float, nu: float, n: int, d: int) -> RateBound:
    """Select the decay-rate branch for (alpha, nu) and evaluate it at (n, d).

    nu only enters for alpha < 1 (where it separates the short- and
    long-memory branches) and is validated only there.
    """
    if not 0.0 < alpha < 2.0:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if d < 2:
        raise DomainError(f"d must be >= 2, got {d}")
    regime = regime_for_alpha(alpha)
    ln_d = math.log(d)
    if regime is Regime.LOG:
        r = 1.0 / ln_d
        return RateBound(alpha, nu, n, d, r, n**1.5 / ln_d, "alpha=3/2", regime)
    if regime is Regime.NONCENTRAL:
        r = float(d) ** ((3.0 - 2.0 * alpha) / 2.0)
        return RateBound(alpha, nu, n, d, r, n * r, "3/2<alpha<2", regime)
    if alpha < 1.0:
        if not 1.0 < nu <= 2.0:
            raise DomainError(f"nu must lie in (1, 2] when alpha < 1, got {nu}")
        if alpha + nu < 2.0:
            branch = "alpha<1,alpha+nu<2"
            r = float(d) ** ((2.0 * alpha - 3.0) / (2.0 * (9.0 - 2.0 * alpha)))
        else:
            branch = "alpha<1,alpha+nu>=2"
            r = float(d) ** -0.5
    elif abs(alpha - 1.25) <= ALPHA_QUARTER_TOL:
        branch = "alpha=5/4"
        r = float(d) ** -0.5 * ln_d**1.5
    elif alpha < 1.25:
        branch = "1<=alpha<5/4"
        r = float(d) ** -0.5
    else:
        branch = "5/4<alpha<3/2"
        r = float(d) ** (2.0 * alpha - 3.0)
    total = n**1.5 * r + n * float(d) ** (2.0 * alpha - 3.0) + n / float(d)
    return RateBound(alpha, nu, n, d, r, total, branch, regime)


# ---------------------------------------------------------------------------
# non-central limit variance
# ---------------------------------------------------------------------------

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(12)
_GAUSS_NODES01 = 0.5 * (_GAUSS_NODES + 1.0)
_GAUSS_WEIGHTS01 = 0.5 * _GAUSS_WEIGHTS


def rosenblatt_variance(spec: ProcessSpec, x: float) -> float:
    """Limiting variance of off-diagonal entries in the non-central regime.

    Equals (1 / (4 lam^2)) * int_0^x int_0^x (s t)^(alpha - 2 beta)
    (d^2/(ds dt) E[X_s X_t])^2 ds dt; the integrand has an integrable
    |t - s|^(2 alpha - 4) singularity on the diagonal, so the square is
    folded onto {s < t}, rewritten in (u, v) = (t - s, s) and integrated
    with fixed-order Gauss panels refined geometrically into both the
    u -> 0 singularity and the v -> 0 edge. Diagonal Wishart entries have
    exactly twice this variance.

    Relative accuracy target: 1e-6.
    """
    alpha, beta, lam = spec.alpha, spec.beta, spec.lam
    if alpha <= 1.5:
        raise DomainError(
            f"integral diverges for alpha = {alpha} <= 3/2 (no non-central limit)"
        )
    if x <= 0.0:
        raise DomainError("x must be positive")

    # enough outer panels that the neglected u-tail is O(1e-10) relative
    n_outer = max(12, math.ceil(10.0 * math.log(10.0) / ((2 * alpha - 3) * math.log(2.0))))
    n_inner = 44
    expo = alpha - 2.0 * beta

    i = np.arange(n_inner)
    total = 0.0
    for j in range(n_outer):
        u_hi = x * 0.5**j
        u_lo = 0.5 * u_hi
        u = u_lo + (u_hi - u_lo) * _GAUSS_NODES01          # (p,)
        w_u = (u_hi - u_lo) * _GAUSS_WEIGHTS01
        span = x - u                                       # inner length, (p,)
        v_hi = span[:, None] * 0.5**i                      # (p, n_inner)
        v_lo = 0.5 * v_hi
        v = v_lo[:, :, None] + (v_hi - v_lo)[:, :, None] * _GAUSS_NODES01
        w_v = (v_hi - v_lo)[:, :, None] * _GAUSS_WEIGHTS01
        s = v
        t = u[:, None, None] + v
        g = mixed_partial(spec, s, t)
        g = g * g * (s * t) ** expo
        inner = np.sum(g * w_v, axis=(1, 2))               # (p,)
        total += float(np.dot(w_u, inner))
    return total / (2.0 * lam * lam)


# ---------------------------------------------------------------------------
# functional L2 modulus
# ---------------------------------------------------------------------------

def increment_l2_gap(
    spec: ProcessSpec, d: int, x: float, y: float, regime: Regime
) -> float:
    """Exact E[(W_ij(floor(dx)) - W_ij(floor(dy)))^2] for off-diagonal i, j.

    The difference of partial sums only involves columns floor(dy)+1 ..
    floor(dx), so the gap is the regime scaling applied to the delta-square
    sum over that index window. Zero when both floors coincide.
    """
    regime = Regime(regime)
    if y >= x:
        raise DomainError(f"need y < x, got y={y}, x={x}")
    if y <= 0.0:
        raise DomainError("y must be positive")
    lo = floor_index(d * y) + 1
    hi = floor_index(d * x)
    if lo - 1 < 1:
        raise DomainError(f"floor(d*y) must be >= 1, got {lo - 1}")
    if hi < lo:
        return 0.0
    grid = Grid.FINE if regime is Regime.NONCENTRAL else Grid.UNIT
    sq = delta_sq_range_sum(spec, lo, hi, grid, d if grid is Grid.FINE else None)
    return _regime_scale(regime, d, spec.alpha) * sq

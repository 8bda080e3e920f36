"""Numerical laboratory for high-dimensional Wishart matrices built from
non-stationary self-similar Gaussian increments.

Closed-form quantities (increment correlations, variance limits,
contraction sums, rate bounds, the non-central limit variance) are computed
exactly; the limit theorems themselves (GOE central limit, log regime,
second-chaos non-central limit, semicircle spectral law, functional
tightness) are verified by Monte Carlo at desk scale.
"""

from .errors import (
    ConfigError,
    ContractError,
    DomainError,
    FitError,
    NumericError,
    WishartLabError,
)
from .kernels import (
    HypothesisDiagnostics,
    ProcessKind,
    ProcessSpec,
    Regime,
    RegimeParams,
    covariance,
    derive_regime_params,
    hypothesis_diagnostics,
    mixed_partial,
    mixed_partial_fd,
    regime_for_alpha,
)
from .increments import (
    DeltaMatrix,
    Grid,
    RateBound,
    Sigma2Extrapolated,
    Sigma2Series,
    a_alpha,
    delta_matrix,
    delta_sq_range_sum,
    floor_index,
    increment_cov,
    increment_l2_gap,
    increment_sd,
    quartic_contraction,
    rate_bound,
    regime_variance,
    rho2_limit,
    rosenblatt_variance,
    sigma2_extrapolated,
    sigma2_series,
)
from .sampler import (
    EnsembleConfig,
    PathFactor,
    WishartSample,
    assemble_wishart,
    path_factor,
    rng_stream,
    sample_ensemble,
    sample_goe,
    sample_rows,
)
from .spectra import (
    SpectralSummary,
    eigenvalues,
    esd_histogram,
    esd_moments,
    moment_distance,
    semicircle_density,
    semicircle_moment,
)
from .stats import (
    Cumulants,
    RateFit,
    bootstrap_ci,
    cumulants,
    fit_power_law,
    w1_to_gaussian,
    wasserstein1_empirical,
)
from .functional import (
    ModulusRow,
    Trajectory,
    l2_modulus_table,
    modulus_table_to_csv,
    sample_trajectory,
)

__version__ = "0.1.0"

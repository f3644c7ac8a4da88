"""Sieve projection estimators, confidence intervals and bands for Lévy densities."""
from .errors import DomainError, ParseError, SpacingError, UnsupportedDegreeError
from .estimation import (
    ProjectionEstimate,
    beta_hat,
    estimate_eval,
    increments_from_prices,
    l2_norm_sq,
    penalty,
    project,
    select_model,
)
from .inference import (
    BandResult,
    band,
    gumbel_constants,
    gumbel_quantile,
    kappa_constants,
    normal_quantile,
    plan_pointwise_schedule,
    pointwise_ci,
    validate_band_schedule,
)
from .levy_models import (
    SP500_VG,
    IncrementSeries,
    VarianceGammaParams,
    VgDensityParams,
    exp_integral_e1,
    simulate_vg_increments,
    vg_levy_density,
    vg_tail_mass,
    vg_to_density_params,
)
from .sieve_basis import SieveSpec, b_factor, basis_eval, gram_matrix, legendre_eval

__version__ = "0.1.0"

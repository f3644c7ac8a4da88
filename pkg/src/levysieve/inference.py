"""Pointwise confidence intervals and uniform confidence bands.

Pointwise intervals use the normal limit of the projection estimator with
normalising constant ``c_T = sqrt(T/m)``.  Uniform bands use the Gumbel
limit of the maximal standardised deviation over the ``m`` bins, which is
available for piecewise constant (``k = 0``) and piecewise linear (``k = 1``)
sieves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import DomainError, UnsupportedDegreeError
from .estimation import ProjectionEstimate, estimate_eval
from .sieve_basis import b_factor

FORMULAS = ("exact", "simple")


def normal_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError(f"normal quantile needs 0 < p < 1, got {p}")
    return float(ndtri(p))


def gumbel_constants(m: int) -> tuple[float, float]:
    """Centering ``a_m`` and location ``b_m`` for maxima of ``m`` |normals|."""
    if m < 2:
        raise DomainError(f"Gumbel constants need m >= 2, got {m}")
    a_m = math.sqrt(2.0 * math.log(m))
    b_m = a_m - (math.log(math.log(m)) + math.log(4.0 * math.pi)) / (2.0 * a_m)
    return a_m, b_m


def kappa_constants(k: int, a: float, b: float) -> tuple[float, float]:
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    if k == 0:
        return math.sqrt(b - a), 2.0
    if k == 1:
        return math.sqrt(b - a) / 2.0, 4.0
    raise UnsupportedDegreeError(f"unsupported degree k={k}: uniform bands are available for k in {{0, 1}} only")


def gumbel_quantile(level_alpha: float, kappa_prime: float) -> float:
    """``y*`` solving ``exp(-kappa' * exp(-y*)) = 1 - level_alpha``."""
    if not 0.0 < level_alpha < 1.0:
        raise DomainError(f"level_alpha must lie in (0, 1), got {level_alpha}")
    if not kappa_prime > 0:
        raise DomainError(f"kappa' must be > 0, got {kappa_prime}")
    return -math.log(-math.log1p(-level_alpha) / kappa_prime)


def _check_level(level_alpha):
    if not 0.0 < level_alpha < 1.0:
        raise DomainError(f"level_alpha must lie in (0, 1), got {level_alpha}")


def pointwise_ci(est: ProjectionEstimate, x, level_alpha: float = 0.05):
    """Normal-theory interval for ``s(x)`` at confidence ``1 - level_alpha``.

    Returns ``(lower, upper)``; arrays when ``x`` is an array.
    """
    _check_level(level_alpha)
    spec = est.spec
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr <= spec.a) | (x_arr >= spec.b)):
        raise DomainError(f"pointwise intervals need x in the open window ({spec.a}, {spec.b})")
    s_hat = estimate_eval(est, x_arr)
    c_T = math.sqrt(est.T / spec.m)
    z = normal_quantile(1.0 - level_alpha / 2.0)
    half = b_factor(spec, x_arr) / (c_T * math.sqrt(spec.b - spec.a)) * np.sqrt(np.maximum(s_hat, 0.0)) * z
    lower = np.maximum(s_hat - half, 0.0)
    upper = np.maximum(s_hat + half, lower)
    if np.ndim(x) == 0:
        return float(lower), float(upper)
    return lower, upper


@dataclass(frozen=True, eq=False)
class BandResult:
    grid: np.ndarray
    s_hat: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float
    formula: str
    d_n: float
    constants: dict = field(default_factory=dict)

    def contains(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return (values >= self.lower) & (values <= self.upper)


def exact_band_bounds(s_hat, d_n: float):
    """Roots in ``s`` of ``(s_hat - s)^2 = 2 d_n^2 s`` with ``s_hat`` clamped at 0."""
    s = np.maximum(np.asarray(s_hat, dtype=float), 0.0)
    d2 = d_n * d_n
    upper = s + d2 + np.sqrt(d2 * (2.0 * s + d2))
    # product of the roots is s^2; avoids cancellation when s >> d_n^2
    lower = s * s / upper
    return lower, upper


def band(
    est: ProjectionEstimate,
    level_alpha: float = 0.05,
    formula: str = "exact",
    grid_size: int = 512,
    grid=None,
) -> BandResult:
    """Uniform confidence band for the Lévy density over the sieve window."""
    _check_level(level_alpha)
    if formula not in FORMULAS:
        raise DomainError(f"formula must be one of {FORMULAS}, got {formula!r}")
    if not est.regular:
        raise DomainError("uniform bands require evenly spaced observations")
    spec = est.spec
    kappa, kappa_p = kappa_constants(spec.k, spec.a, spec.b)
    if spec.m < 2:
        raise DomainError("uniform bands need at least m = 2 bins")
    a_m, b_m = gumbel_constants(spec.m)
    y_star = gumbel_quantile(level_alpha, kappa_p)
    t_bar = est.T / spec.m
    spread = (y_star / a_m + b_m) / math.sqrt(t_bar)
    d_n = spread / (math.sqrt(2.0) * kappa)
    if grid is None:
        if grid_size < 2:
            raise DomainError(f"grid_size must be >= 2, got {grid_size}")
        grid = np.linspace(spec.a, spec.b, int(grid_size))
    grid = np.asarray(grid, dtype=float)
    s_hat = estimate_eval(est, grid)
    if formula == "exact":
        lower, upper = exact_band_bounds(s_hat, d_n)
    else:
        half = spread / kappa * np.sqrt(np.maximum(s_hat, 0.0))
        lower = np.maximum(s_hat - half, 0.0)
        upper = np.maximum(s_hat + half, lower)
    constants = {"a_m": a_m, "b_m": b_m, "kappa": kappa, "kappa_prime": kappa_p, "y_star": y_star}
    return BandResult(grid, s_hat, lower, upper, 1.0 - level_alpha, formula, d_n, constants)


def plan_pointwise_schedule(T: float, smoothness_alpha: float, beta: float, margin: float = 0.05):
    """Undersmoothed sieve size and maximal sampling step for horizon ``T``.

    Returns ``(m_T, max_delta)`` with ``m_T = floor(T^(1-2 beta))`` (at least
    1) and ``max_delta = T^-(1 - beta + margin)``.
    """
    if not smoothness_alpha >= 1:
        raise DomainError(f"smoothness alpha must be >= 1, got {smoothness_alpha}")
    upper = smoothness_alpha / (2.0 * smoothness_alpha + 1.0)
    if not 0.0 < beta < upper:
        raise DomainError(f"beta must lie in (0, {upper:.6g}) for smoothness {smoothness_alpha}, got {beta}")
    if not T > 0:
        raise DomainError(f"T must be > 0, got {T}")
    m_T = max(1, int(math.floor(T ** (1.0 - 2.0 * beta))))
    max_delta = T ** (-(1.0 - beta + margin))
    return m_T, max_delta


@dataclass(frozen=True)
class ScheduleReport:
    alpha1: float
    alpha2: float
    smoothness_alpha: float
    checks: list

    @property
    def ok(self) -> bool:
        return all(flag for _, flag in self.checks)


def validate_band_schedule(alpha1: float, alpha2: float, smoothness_alpha: float) -> ScheduleReport:
    """Check growth exponents for ``T_n ~ n^alpha1`` and ``m_n ~ n^alpha2``.

    The first two checks make the Gumbel limit of the centred deviation
    valid.  The last two also make the bias negligible, so the band covers
    the density itself.
    """
    if not smoothness_alpha > 0:
        raise DomainError(f"smoothness alpha must be > 0, got {smoothness_alpha}")
    a1, a2, s = alpha1, alpha2, smoothness_alpha
    checks = [
        ("horizon_exponent_in_unit_interval", 0.0 < a1 < 1.0),
        ("sieve_exponent_below_horizon_and_mesh", 0.0 < a2 < min(1.0 - a1, a1)),
        ("horizon_exponent_bias_bound", 0.0 < a1 < (2.0 * s + 1.0) / (3.0 * s + 2.0)),
        ("sieve_exponent_bias_window", a1 / (1.0 + 2.0 * s) < a2 < min(2.0 - 3.0 * a1, a1)),
    ]
    return ScheduleReport(a1, a2, s, checks)

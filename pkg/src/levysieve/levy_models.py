"""Variance-gamma Lévy model: parametrisations, Lévy density, tail mass, simulation.

Time is measured in years throughout.  The VG process is Brownian motion with
drift ``theta`` and volatility ``sigma`` run on a gamma clock with unit mean
rate and variance rate ``nu``.  Its Lévy density is

    s(x) = alpha/|x| * exp(-|x|/beta_minus)   (x < 0)
    s(x) = alpha/x   * exp(-x/beta_plus)      (x > 0)

with ``alpha = 1/nu`` and
``1/beta_pm = sqrt(2/nu + theta^2/sigma^2)/sigma -+ theta/sigma^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._accel import resolve_backend
from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061

# calendar used to convert clock time to years: 252 trading days of 6.5 hours
TRADING_DAYS = 252
HOURS_PER_DAY = 6.5
YEAR_SECONDS = TRADING_DAYS * HOURS_PER_DAY * 3600.0
FIVE_SECONDS = 5.0 / YEAR_SECONDS
ONE_MINUTE = 60.0 / YEAR_SECONDS


@dataclass(frozen=True)
class VarianceGammaParams:
    theta: float
    sigma: float
    nu: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")
        if not self.nu > 0:
            raise DomainError(f"nu must be > 0, got {self.nu}")

    @classmethod
    def from_variance(cls, theta: float, sigma2: float, nu: float) -> "VarianceGammaParams":
        if not sigma2 > 0:
            raise DomainError(f"sigma^2 must be > 0, got {sigma2}")
        return cls(theta, math.sqrt(sigma2), nu)


@dataclass(frozen=True)
class VgDensityParams:
    alpha: float
    beta_plus: float
    beta_minus: float

    def __post_init__(self):
        for name in ("alpha", "beta_plus", "beta_minus"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)}")


# annualised VG fit to daily S&P 500 returns
SP500_VG = VarianceGammaParams.from_variance(-0.00056256, 0.01373584, 0.002)


@dataclass(frozen=True, eq=False)
class IncrementSeries:
    """Increments of a path observed every ``delta`` years."""

    delta: float
    values: np.ndarray
    regular: bool = field(default=True)

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError(f"delta must be > 0, got {self.delta}")
        vals = np.ascontiguousarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 1:
            raise DomainError("an increment series needs at least one value")
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def T(self) -> float:
        return self.delta * self.n

    def __len__(self):
        return self.n


def vg_to_density_params(p: VarianceGammaParams) -> VgDensityParams:
    root = math.sqrt(2.0 / p.nu + p.theta**2 / p.sigma**2) / p.sigma
    tilt = p.theta / p.sigma**2
    return VgDensityParams(1.0 / p.nu, 1.0 / (root - tilt), 1.0 / (root + tilt))


def vg_levy_density(d: VgDensityParams, x):
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr == 0.0):
        raise DomainError("the Lévy density is not defined at 0")
    ax = np.abs(x_arr)
    scale = np.where(x_arr > 0, d.beta_plus, d.beta_minus)
    out = d.alpha / ax * np.exp(-ax / scale)
    return float(out) if np.ndim(x) == 0 else out


def vg_tail_mass(d: VgDensityParams, y):
    """Expected number of jumps per year of size at least ``y > 0``."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(~(y_arr > 0)):
        raise DomainError("tail mass needs y > 0")
    out = d.alpha * exp_integral_e1(y_arr / d.beta_plus)
    return float(out) if np.ndim(y) == 0 else out


def vg_bin_mass(d: VgDensityParams, lo, hi):
    """Lévy measure of ``[lo, hi]`` for ``0 < lo <= hi``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return d.alpha * (exp_integral_e1(lo / d.beta_plus) - exp_integral_e1(hi / d.beta_plus))


def exp_integral_e1(x):
    """Exponential integral ``E1(x)`` for ``x > 0``.

    Power series for ``x <= 1``, modified-Lentz continued fraction above.
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(x_arr > 0)):
        raise DomainError("E1 is defined here for x > 0 only")
    flat = np.atleast_1d(x_arr).ravel()
    out = np.empty_like(flat)
    small = flat <= 1.0
    if small.any():
        out[small] = _e1_series(flat[small])
    if (~small).any():
        out[~small] = _e1_cfrac(flat[~small])
    out = out.reshape(x_arr.shape)
    return float(out) if np.ndim(x) == 0 else out


def _e1_series(x):
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = np.zeros_like(x)
    term = np.ones_like(x)
    for k in range(1, 40):
        term = term * (-x) / k
        total += term / k
    return -EULER_GAMMA - np.log(x) - total


def _e1_cfrac(x, max_iter=500, eps=1e-16):
    # E1(x) = exp(-x) / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...)))
    tiny = 1e-300
    b = x + 1.0
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, max_iter):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h = h * delta
        if np.all(np.abs(delta - 1.0) < eps):
            break
    return h * np.exp(-x)


def simulate_vg_increments(
    p: VarianceGammaParams,
    delta: float,
    n: int,
    seed: int,
    start: int = 0,
    backend: str | None = None,
) -> IncrementSeries:
    """Simulate ``n`` independent VG increments over steps of ``delta`` years.

    Increment ``i`` is ``theta*G + sigma*sqrt(G)*Z`` with
    ``G ~ Gamma(delta/nu, scale=nu)`` and is a pure function of
    ``(seed, start + i)``, so long series can be produced in shards.
    """
    if not delta > 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    shape = delta / p.nu
    lam, w, r = _kernels.small_shape_constants(shape)
    seed_key = _kernels.derive_seed(seed)
    args = (shape, p.theta, p.sigma, p.nu, lam, w, r)
    if resolve_backend(backend) == "numba":
        vals = _kernels._vg_increments_numba(np.uint64(seed_key), np.int64(start), n, *args)
    else:
        vals = _kernels._vg_increments_np(seed_key, start, n, *args)
    return IncrementSeries(delta, vals)


def sample_log_gamma(shape: float, n: int, seed: int, backend: str | None = None) -> np.ndarray:
    """``log`` of ``n`` Gamma(shape, 1) draws from the simulation sampler."""
    if not shape > 0:
        raise DomainError(f"shape must be > 0, got {shape}")
    lam, w, r = _kernels.small_shape_constants(shape)
    seed_key = _kernels.derive_seed(seed)
    if resolve_backend(backend) == "numba":
        return _kernels._log_gamma_numba(np.uint64(seed_key), int(n), float(shape), lam, w, r)
    return _kernels._log_gamma_np(seed_key, int(n), float(shape), lam, w, r)

"""Projection estimators of the Lévy density and penalised choice of the sieve.

The building block is the realised phi-variation per unit time,

    beta_hat(phi) = (1/T) * sum_l phi(dX_l),

evaluated for every basis function of the sieve.  Since the basis is
orthonormal, ``sum beta_hat(phi) * phi`` estimates the orthogonal projection
of the Lévy density onto the sieve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._accel import resolve_backend
from .errors import DomainError, SpacingError
from .levy_models import IncrementSeries
from .sieve_basis import SieveSpec, basis_values

SPACING_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class ProjectionEstimate:
    spec: SieveSpec
    coeffs: np.ndarray
    T: float
    n: int
    regular: bool = True

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (self.spec.dim,):
            raise DomainError(f"expected {self.spec.dim} coefficients, got {coeffs.shape}")
        if not self.T > 0:
            raise DomainError(f"T must be > 0, got {self.T}")
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def matrix(self) -> np.ndarray:
        """Coefficients as an ``(m, k+1)`` array (row = bin, column = degree)."""
        return self.coeffs.reshape(self.spec.m, self.spec.k + 1)

    def __call__(self, x):
        return estimate_eval(self, x)


def _sums(series: IncrementSeries, spec: SieveSpec, backend: str | None = None):
    x = series.values
    if resolve_backend(backend) == "numba":
        return _kernels._accumulate_numba(x, spec.a, spec.b, spec.m, spec.k)
    return _kernels._accumulate_np(x, spec.a, spec.b, spec.m, spec.k)


def _basis_scale(spec: SieveSpec) -> np.ndarray:
    return np.sqrt((2 * np.arange(spec.k + 1) + 1) / spec.width)


def beta_hat(series: IncrementSeries, spec: SieveSpec, i: int, j: int) -> float:
    if not 1 <= i <= spec.m or not 0 <= j <= spec.k:
        raise IndexError(f"basis index ({i}, {j}) outside 1..{spec.m} x 0..{spec.k}")
    idx, vals = basis_values(spec, series.values)
    return float(vals[j][idx == i - 1].sum() / series.T)


def project(series: IncrementSeries, spec: SieveSpec, backend: str | None = None) -> ProjectionEstimate:
    s1, _ = _sums(series, spec, backend)
    coeffs = (s1 * _basis_scale(spec)) / series.T
    return ProjectionEstimate(spec, coeffs.ravel(), series.T, series.n, series.regular)


def estimate_eval(est: ProjectionEstimate, x):
    x_arr = np.asarray(x, dtype=float)
    spec = est.spec
    if np.any((x_arr < spec.a) | (x_arr > spec.b)) or np.any(np.isnan(x_arr)):
        raise DomainError(f"estimate is defined on [{spec.a}, {spec.b}] only")
    idx, vals = basis_values(spec, x_arr.ravel())
    out = np.einsum("jn,nj->n", vals, est.matrix[idx]).reshape(x_arr.shape)
    return float(out) if np.ndim(x) == 0 else out


def l2_norm_sq(est: ProjectionEstimate) -> float:
    return float(np.dot(est.coeffs, est.coeffs))


def penalty(series: IncrementSeries, spec: SieveSpec, backend: str | None = None) -> float:
    """``(2/T^2) * sum_l sum_{i,j} phi_{i,j}(dX_l)^2``."""
    _, s2 = _sums(series, spec, backend)
    return float(2.0 * (s2 * _basis_scale(spec) ** 2).sum() / series.T**2)


@dataclass(frozen=True)
class ModelSelection:
    m: int
    scores: dict

    @property
    def table(self):
        return sorted(self.scores.items())


def select_model(
    series: IncrementSeries,
    a: float,
    b: float,
    k: int,
    m_candidates,
    backend: str | None = None,
) -> ModelSelection:
    """Pick the number of bins minimising ``-||s_hat_m||^2 + pen(m)``.

    Ties go to the smallest ``m``.  The full score table is returned so
    near-optimal candidates can be inspected.
    """
    cands = sorted({int(m) for m in m_candidates})
    if not cands:
        raise DomainError("need at least one candidate m")
    if cands[0] < 1:
        raise DomainError("candidate m values must be >= 1")
    scores = {}
    for m in cands:
        spec = SieveSpec(a, b, m, k)
        s1, s2 = _sums(series, spec, backend)
        scale = _basis_scale(spec)
        coeffs = s1 * scale / series.T
        pen = 2.0 * (s2 * scale**2).sum() / series.T**2
        scores[m] = float(-np.sum(coeffs * coeffs) + pen)
    best = min(cands, key=lambda m: (scores[m], m))
    return ModelSelection(best, scores)


def increments_from_prices(times, values) -> IncrementSeries:
    """Difference an evenly sampled path into increments."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape != v.shape:
        raise DomainError("times and values must be 1-D arrays of equal length")
    if t.size < 2:
        raise DomainError("need at least two observations to form an increment")
    dt = np.diff(t)
    if np.any(~(dt > 0)):
        raise SpacingError("observation times must be strictly increasing")
    delta = float(np.median(dt))
    if np.any(np.abs(dt - delta) > SPACING_RTOL * delta):
        raise SpacingError("observation times are not evenly spaced")
    return IncrementSeries(delta, np.diff(v))

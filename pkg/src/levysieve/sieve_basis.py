"""Regular piecewise-polynomial sieves on a window ``[a, b]`` away from zero.

The sieve of degree ``k`` on ``m`` equal bins is spanned by rescaled Legendre
polynomials supported on one bin each:

    phi_{i,j}(x) = sqrt((2j+1)/h) * P_j((2x - (x_{i-1} + x_i)) / h) * 1{x in bin i}

with ``h = (b - a)/m``.  ``P_j`` is the standard Legendre polynomial
(``P_j(1) = 1``), which makes the family orthonormal in ``L2([a, b])``.

Bins are half-open ``[x_{i-1}, x_i)`` except the last, which is closed at
``b``.  Bin indices are 1-based in the public API (``i = 1..m``) and 0-based
internally.  Coefficient vectors are laid out bin-major: position
``(i-1)*(k+1) + j``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedDegreeError

MAX_DEGREE = 32
_U_TOL = 1e-12


@dataclass(frozen=True)
class SieveSpec:
    a: float
    b: float
    m: int
    k: int = 0

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
            raise DomainError(f"window needs a < b, got [{a}, {b}]")
        if a <= 0.0 <= b:
            raise DomainError(f"window [{a}, {b}] must not contain the origin")
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"number of bins m must be a positive integer, got {self.m}")
        if int(self.k) != self.k or self.k < 0:
            raise DomainError(f"degree k must be a non-negative integer, got {self.k}")
        if self.k > MAX_DEGREE:
            raise UnsupportedDegreeError(f"degree k={self.k} exceeds the cap {MAX_DEGREE}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "k", int(self.k))

    @property
    def width(self) -> float:
        return (self.b - self.a) / self.m

    @property
    def dim(self) -> int:
        return self.m * (self.k + 1)

    @property
    def edges(self) -> np.ndarray:
        e = self.a + np.arange(self.m + 1) * self.width
        e[-1] = self.b
        return e

    def with_m(self, m: int) -> "SieveSpec":
        return SieveSpec(self.a, self.b, m, self.k)

    def locate(self, x):
        """0-based bin index and local coordinate in ``[-1, 1]`` for each ``x``.

        Points outside ``[a, b]`` get index ``-1`` (their coordinate is
        meaningless).
        """
        x = np.asarray(x, dtype=float)
        h = self.width
        inside = (x >= self.a) & (x <= self.b)
        idx = np.floor((x - self.a) / h)
        idx = np.where(inside, np.clip(idx, 0, self.m - 1), -1).astype(np.int64)
        lo = self.a + idx * h
        u = np.clip((2.0 * x - (2.0 * lo + h)) / h, -1.0, 1.0)
        return idx, u


def legendre_eval(j: int, u):
    """Standard Legendre polynomial ``P_j(u)`` by the three-term recurrence."""
    if int(j) != j or j < 0:
        raise DomainError(f"degree must be a non-negative integer, got {j}")
    if j > MAX_DEGREE:
        raise UnsupportedDegreeError(f"degree {j} exceeds the cap {MAX_DEGREE}")
    u_arr = np.asarray(u, dtype=float)
    if np.any(np.abs(u_arr) > 1.0 + _U_TOL) or np.any(np.isnan(u_arr)):
        raise DomainError("Legendre argument must lie in [-1, 1]")
    u_arr = np.clip(u_arr, -1.0, 1.0)
    out = legendre_table(int(j), u_arr)[int(j)]
    return float(out) if np.ndim(u) == 0 else out


def legendre_table(k: int, u: np.ndarray) -> np.ndarray:
    """Rows ``P_0(u), ..., P_k(u)``; no domain checks."""
    u = np.asarray(u, dtype=float)
    out = np.empty((k + 1,) + u.shape)
    out[0] = 1.0
    if k >= 1:
        out[1] = u
    for j in range(1, k):
        out[j + 1] = ((2 * j + 1) * u * out[j] - j * out[j - 1]) / (j + 1)
    return out


def _check_index(spec: SieveSpec, i: int, j: int):
    if not 1 <= i <= spec.m:
        raise IndexError(f"bin index {i} outside 1..{spec.m}")
    if not 0 <= j <= spec.k:
        raise IndexError(f"degree index {j} outside 0..{spec.k}")


def basis_eval(spec: SieveSpec, i: int, j: int, x):
    """Value of the orthonormal basis function ``phi_{i,j}`` at ``x``."""
    _check_index(spec, i, j)
    idx, u = spec.locate(x)
    val = np.sqrt((2 * j + 1) / spec.width) * legendre_table(j, u)[j]
    val = np.where(idx == i - 1, val, 0.0)
    return float(val) if np.ndim(x) == 0 else val


def basis_values(spec: SieveSpec, x):
    """Sparse design: bin index per point and the ``k+1`` nonzero basis values.

    Returns ``(idx, vals)`` with ``vals`` of shape ``(k+1, len(x))``; columns
    for points outside the window are zero.
    """
    idx, u = spec.locate(np.atleast_1d(x))
    scale = np.sqrt((2 * np.arange(spec.k + 1) + 1) / spec.width)
    vals = scale[:, None] * legendre_table(spec.k, u)
    vals[:, idx < 0] = 0.0
    return idx, vals


def b_factor(spec: SieveSpec, x):
    """Variance-shape factor ``sqrt(sum_j (2j+1) P_j(u)^2)`` at ``x``.

    ``u`` is the position of ``x`` inside its bin.  Equals 1 for ``k = 0``.
    """
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < spec.a) | (x_arr > spec.b)) or np.any(np.isnan(x_arr)):
        raise DomainError(f"b_factor needs x in [{spec.a}, {spec.b}]")
    _, u = spec.locate(x_arr)
    weights = 2 * np.arange(spec.k + 1) + 1
    p = legendre_table(spec.k, u)
    out = np.sqrt(np.tensordot(weights, p * p, axes=1))
    return float(out) if np.ndim(x) == 0 else out


def gram_matrix(spec: SieveSpec, quad_order: int) -> np.ndarray:
    """Gauss-Legendre Gram matrix of the basis, ``quad_order`` nodes per bin."""
    if quad_order < 2 * spec.k + 2:
        raise DomainError(f"quad_order must be >= 2k+2 = {2 * spec.k + 2}")
    nodes, weights = np.polynomial.legendre.leggauss(quad_order)
    h = spec.width
    lo = spec.edges[:-1]
    # nodes are interior to each bin, so membership is unambiguous
    x = (lo[:, None] + 0.5 * h * (nodes[None, :] + 1.0)).ravel()
    w = np.tile(0.5 * h * weights, spec.m)
    idx, vals = basis_values(spec, x)
    design = np.zeros((spec.dim, x.size))
    cols = np.arange(x.size)
    for j in range(spec.k + 1):
        design[idx * (spec.k + 1) + j, cols] = vals[j]
    return (design * w) @ design.T

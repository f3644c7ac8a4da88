"""Numeric kernels with a numba path and a vectorised numpy path.

Random numbers come from a counter-based generator: draw ``c`` of stream
``i`` is ``mix64(key_i + (c+1) * GOLDEN)`` with ``key_i`` itself a SplitMix64
hash of ``(seed, i)``.  Output ``i`` therefore depends only on ``(seed, i)``
and can be computed in any order or on any number of threads.

Both paths run the same arithmetic in the same order.  Within one backend,
results are bit-identical across runs and thread counts.  Across backends
they agree to rounding, since libm and numpy's SIMD ``exp``/``log`` may
differ in the last ulp.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit, prange
from .sieve_basis import SieveSpec, legendre_table

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53
_TWO_PI = 2.0 * math.pi
_MASK = (1 << 64) - 1


# --------------------------------------------------------------------------
# seeding helpers (plain Python ints)


def mix64_int(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Independent 64-bit seed for a sub-stream such as a replication index."""
    z = mix64_int(int(seed) & _MASK)
    for p in path:
        z = mix64_int(z + (int(p) + 1) * 0x9E3779B97F4A7C15)
    return z


# --------------------------------------------------------------------------
# scalar kernels (compiled by numba, also callable from Python for debugging)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def _uniform(key, c):
    x = _mix64(key + (np.uint64(c) + _ONE) * GOLDEN)
    return (float(x >> _S11) + 0.5) * _INV53


@njit(cache=True)
def _log_gamma_small(key, c, a, lam, w, r):
    """Log of a Gamma(a, 1) draw for 0 < a < 1 by exponential-mixture rejection.

    Samples ``z = -a log X`` from the density proportional to
    ``exp(-z - exp(-z/a))`` under the envelope ``exp(-z)`` on ``z >= 0`` and
    ``w*lam*exp(lam*z)`` on ``z < 0``.  Working on the log scale keeps shapes
    around 1e-4 usable: ``X`` itself is below 1e-308 most of the time there.
    """
    while True:
        u = _uniform(key, c)
        c += 1
        if u <= r:
            z = -math.log(u / r)
            log_env = -z
        else:
            z = math.log(_uniform(key, c)) / lam
            c += 1
            log_env = math.log(w * lam) + lam * z
        log_h = -z - math.exp(-z / a)
        u3 = _uniform(key, c)
        c += 1
        if math.log(u3) <= log_h - log_env:
            return -z / a, c


@njit(cache=True)
def _gamma_mt(key, c, a):
    """Gamma(a, 1) for a >= 1 (Marsaglia-Tsang squeeze)."""
    d = a - 1.0 / 3.0
    cc = 1.0 / math.sqrt(9.0 * d)
    while True:
        u1 = _uniform(key, c)
        u2 = _uniform(key, c + 1)
        c += 2
        x = math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)
        v = 1.0 + cc * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = _uniform(key, c)
        c += 1
        if math.log(u) < 0.5 * x * x + d - d * v + d * math.log(v):
            return d * v, c


@njit(cache=True)
def _vg_one(key, shape, theta, sigma, nu, lam, w, r):
    c = 0
    if shape < 1.0:
        lg, c = _log_gamma_small(key, c, shape, lam, w, r)
        g = nu * math.exp(lg)
    else:
        g1, c = _gamma_mt(key, c, shape)
        g = nu * g1
    u1 = _uniform(key, c)
    u2 = _uniform(key, c + 1)
    z = math.sqrt(-2.0 * math.log(u1)) * math.cos(_TWO_PI * u2)
    return theta * g + sigma * math.sqrt(g) * z


@njit(cache=True, parallel=True)
def _vg_increments_numba(seed_key, start, n, shape, theta, sigma, nu, lam, w, r):
    out = np.empty(n)
    for t in prange(n):
        key = _mix64(seed_key + (np.uint64(start + t) + _ONE) * GOLDEN)
        out[t] = _vg_one(key, shape, theta, sigma, nu, lam, w, r)
    return out


@njit(cache=True, parallel=True)
def _log_gamma_numba(seed_key, n, a, lam, w, r):
    out = np.empty(n)
    for t in prange(n):
        key = _mix64(seed_key + (np.uint64(t) + _ONE) * GOLDEN)
        if a < 1.0:
            out[t] = _log_gamma_small(key, 0, a, lam, w, r)[0]
        else:
            out[t] = math.log(_gamma_mt(key, 0, a)[0])
    return out


# --------------------------------------------------------------------------
# numpy twins


def _mix64_np(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _uniform_np(key, c):
    x = _mix64_np(key + (c.astype(np.uint64) + _ONE) * GOLDEN)
    return ((x >> _S11).astype(np.float64) + 0.5) * _INV53


def _log_gamma_small_np(key, c, a, lam, w, r):
    out = np.empty(key.shape)
    active = np.arange(key.size)
    k, cc = key.copy(), c.copy()
    log_wlam = math.log(w * lam)
    with np.errstate(over="ignore"):
        while active.size:
            u = _uniform_np(k, cc)
            cc += 1
            right = u <= r
            z = np.empty(u.shape)
            log_env = np.empty(u.shape)
            z[right] = -np.log(u[right] / r)
            log_env[right] = -z[right]
            left = ~right
            z[left] = np.log(_uniform_np(k[left], cc[left])) / lam
            cc[left] += 1
            log_env[left] = log_wlam + lam * z[left]
            log_h = -z - np.exp(-z / a)
            u3 = _uniform_np(k, cc)
            cc += 1
            ok = np.log(u3) <= log_h - log_env
            out[active[ok]] = -z[ok] / a
            c[active[ok]] = cc[ok]
            keep = ~ok
            active, k, cc = active[keep], k[keep], cc[keep]
    return out


def _gamma_mt_np(key, c, a):
    out = np.empty(key.shape)
    d = a - 1.0 / 3.0
    c9 = 1.0 / math.sqrt(9.0 * d)
    active = np.arange(key.size)
    k, cc = key.copy(), c.copy()
    while active.size:
        u1 = _uniform_np(k, cc)
        u2 = _uniform_np(k, cc + 1)
        cc += 2
        x = np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)
        v = 1.0 + c9 * x
        pos = v > 0.0
        ok = np.zeros(active.size, dtype=bool)
        vp = v[pos]
        vp = vp * vp * vp
        # only draw the acceptance uniform for proposals with v > 0
        u = _uniform_np(k[pos], cc[pos])
        cc[pos] += 1
        xp = x[pos]
        ok[pos] = np.log(u) < 0.5 * xp * xp + d - d * vp + d * np.log(vp)
        vals = np.empty(active.size)
        vals[pos] = d * vp
        out[active[ok]] = vals[ok]
        c[active[ok]] = cc[ok]
        keep = ~ok
        active, k, cc = active[keep], k[keep], cc[keep]
    return out


def _stream_keys(seed_key: int, start: int, n: int) -> np.ndarray:
    idx = np.arange(start, start + n, dtype=np.uint64)
    return _mix64_np(np.uint64(seed_key) + (idx + _ONE) * GOLDEN)


def _vg_increments_np(seed_key, start, n, shape, theta, sigma, nu, lam, w, r):
    key = _stream_keys(seed_key, start, n)
    c = np.zeros(n, dtype=np.int64)
    if shape < 1.0:
        g = nu * np.exp(_log_gamma_small_np(key, c, shape, lam, w, r))
    else:
        g = nu * _gamma_mt_np(key, c, shape)
    u1 = _uniform_np(key, c)
    u2 = _uniform_np(key, c + 1)
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(_TWO_PI * u2)
    return theta * g + sigma * np.sqrt(g) * z


def _log_gamma_np(seed_key, n, a, lam, w, r):
    key = _stream_keys(seed_key, 0, n)
    c = np.zeros(n, dtype=np.int64)
    if a < 1.0:
        return _log_gamma_small_np(key, c, a, lam, w, r)
    return np.log(_gamma_mt_np(key, c, a))


def small_shape_constants(a: float):
    """Envelope constants ``(lam, w, r)`` of the small-shape sampler."""
    if not 0.0 < a < 1.0:
        return 0.0, 0.0, 0.0
    lam = 1.0 / a - 1.0
    w = a / (math.e * (1.0 - a))
    return lam, w, 1.0 / (1.0 + w)


# --------------------------------------------------------------------------
# sieve accumulation: S1[i, j] = sum P_j(u_l), S2[i, j] = sum P_j(u_l)^2


@njit(cache=True)
def _accumulate_numba(x, a, b, m, k):
    s1 = np.zeros((m, k + 1))
    s2 = np.zeros((m, k + 1))
    h = (b - a) / m
    p = np.empty(k + 1)
    for t in range(x.size):
        xv = x[t]
        if not (xv >= a and xv <= b):
            continue
        i = int(math.floor((xv - a) / h))
        if i > m - 1:
            i = m - 1
        lo = a + i * h
        u = (2.0 * xv - (2.0 * lo + h)) / h
        if u < -1.0:
            u = -1.0
        elif u > 1.0:
            u = 1.0
        p[0] = 1.0
        if k >= 1:
            p[1] = u
        for j in range(1, k):
            p[j + 1] = ((2 * j + 1) * u * p[j] - j * p[j - 1]) / (j + 1)
        for j in range(k + 1):
            s1[i, j] += p[j]
            s2[i, j] += p[j] * p[j]
    return s1, s2


def _accumulate_np(x, a, b, m, k):
    spec = SieveSpec(a, b, m, k)
    idx, u = spec.locate(x)
    keep = idx >= 0
    idx, u = idx[keep], u[keep]
    p = legendre_table(k, u)
    s1 = np.empty((m, k + 1))
    s2 = np.empty((m, k + 1))
    for j in range(k + 1):
        # bincount adds weights sequentially in input order, like the loop above
        s1[:, j] = np.bincount(idx, weights=p[j], minlength=m)
        s2[:, j] = np.bincount(idx, weights=p[j] * p[j], minlength=m)
    return s1, s2

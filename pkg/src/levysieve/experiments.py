"""Monte-Carlo harness for variance-gamma experiments and the limit theorems.

Every report is a pure function of its arguments.  Replication ``r`` draws
from the sub-stream ``derive_seed(seed, r)``, so reruns give identical
output regardless of thread count.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from ._kernels import derive_seed
from .errors import DomainError
from .estimation import ProjectionEstimate, project, select_model
from .inference import band, gumbel_constants, plan_pointwise_schedule
from .levy_models import (
    VarianceGammaParams,
    VgDensityParams,
    simulate_vg_increments,
    vg_bin_mass,
    vg_levy_density,
    vg_tail_mass,
    vg_to_density_params,
)
from .sieve_basis import SieveSpec, b_factor, basis_values

DEFAULT_WINDOW = (0.001, 0.1)
DEFAULT_CANDIDATES = tuple(range(5, 65, 5))
TARGETS = ("density", "projection")


def _n_steps(T: float, delta: float) -> int:
    if not (T > 0 and delta > 0):
        raise DomainError("T and delta must be > 0")
    n = int(round(T / delta))
    if n < 1 or abs(n * delta - T) > 1e-6 * T:
        raise DomainError(f"delta={delta} does not divide T={T} into a whole number of steps")
    return n


# --------------------------------------------------------------------------
# quadrature helpers


def _bin_nodes(spec: SieveSpec, sub: int = 8, order: int = 24):
    """Composite Gauss-Legendre nodes/weights, ``sub`` pieces per bin."""
    g, wg = np.polynomial.legendre.leggauss(order)
    pieces = spec.m * sub
    hp = spec.width / sub
    lo = spec.a + np.arange(pieces) * hp
    x = (lo[:, None] + 0.5 * hp * (g[None, :] + 1.0)).ravel()
    w = np.tile(0.5 * hp * wg, pieces)
    return x, w


def true_projection(d: VgDensityParams, spec: SieveSpec) -> ProjectionEstimate:
    """Orthogonal projection of the VG density onto the sieve (no sampling noise)."""
    if spec.a < 0:
        raise DomainError("true_projection handles windows on the positive axis")
    if spec.k == 0:
        e = spec.edges
        coeffs = vg_bin_mass(d, e[:-1], e[1:]) / math.sqrt(spec.width)
    else:
        x, w = _bin_nodes(spec)
        idx, vals = basis_values(spec, x)
        sw = w * vg_levy_density(d, x)
        coeffs = np.zeros((spec.m, spec.k + 1))
        for j in range(spec.k + 1):
            coeffs[:, j] = np.bincount(idx, weights=vals[j] * sw, minlength=spec.m)
        coeffs = coeffs.ravel()
    return ProjectionEstimate(spec, coeffs, T=1.0, n=1)


def l2_risk(est: ProjectionEstimate, d: VgDensityParams) -> float:
    """``int_a^b (s_hat - s)^2 dx`` by composite Gauss-Legendre."""
    x, w = _bin_nodes(est.spec)
    diff = est(x) - vg_levy_density(d, x)
    return float(np.dot(w, diff * diff))


# --------------------------------------------------------------------------
# coverage of confidence bands


@dataclass
class CoverageReport:
    params: dict
    T: float
    delta: float
    n: int
    m: object
    k: int
    window: tuple
    reps: int
    level: float
    formula: str
    target: str
    seed: int
    hits: int
    coverage: float
    per_rep: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def coverage_experiment(
    p: VarianceGammaParams,
    T: float,
    delta: float,
    m=40,
    reps: int = 100,
    level: float = 0.95,
    k: int = 0,
    seed: int = 0,
    window=DEFAULT_WINDOW,
    formula: str = "exact",
    target: str = "density",
    grid_size: int = 512,
    candidates=DEFAULT_CANDIDATES,
    backend: str | None = None,
) -> CoverageReport:
    """Fraction of replications whose band contains the target on the whole grid.

    ``target="density"`` compares with the VG Lévy density itself.
    ``target="projection"`` compares with its orthogonal projection onto the
    sieve, which removes the within-bin approximation error from the check.
    ``m="auto"`` picks the sieve size per replication by penalised selection.
    """
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    if target not in TARGETS:
        raise DomainError(f"target must be one of {TARGETS}, got {target!r}")
    auto = m == "auto"
    if not auto:
        SieveSpec(window[0], window[1], int(m), k)
    n = _n_steps(T, delta)
    d = vg_to_density_params(p)
    a, b = window
    grid = np.linspace(a, b, grid_size)
    s_true = vg_levy_density(d, grid)
    truth_cache = {}
    hits = 0
    per_rep = []
    for r in range(reps):
        series = simulate_vg_increments(p, delta, n, derive_seed(seed, r), backend=backend)
        m_r = select_model(series, a, b, k, candidates, backend).m if auto else int(m)
        spec = SieveSpec(a, b, m_r, k)
        est = project(series, spec, backend)
        res = band(est, 1.0 - level, formula, grid=grid)
        if target == "density":
            ref = s_true
        else:
            if m_r not in truth_cache:
                truth_cache[m_r] = true_projection(d, spec)(grid)
            ref = truth_cache[m_r]
        inside = res.contains(ref)
        covered = bool(inside.all())
        hits += covered
        miss = np.flatnonzero(~inside)
        per_rep.append(
            {
                "rep": r,
                "m": m_r,
                "covered": covered,
                "misses": int(miss.size),
                "first_miss_x": float(grid[miss[0]]) if miss.size else None,
            }
        )
    return CoverageReport(
        params=asdict(p),
        T=T,
        delta=delta,
        n=n,
        m="auto" if auto else int(m),
        k=k,
        window=(a, b),
        reps=reps,
        level=level,
        formula=formula,
        target=target,
        seed=seed,
        hits=hits,
        coverage=hits / reps,
        per_rep=per_rep,
    )


# --------------------------------------------------------------------------
# penalised model selection vs oracle risk


def model_selection_experiment(
    p: VarianceGammaParams,
    T: float,
    delta: float,
    k: int = 0,
    candidates=tuple(range(10, 65, 5)),
    reps: int = 20,
    seed: int = 0,
    window=DEFAULT_WINDOW,
    backend: str | None = None,
) -> dict:
    """L2 risk of every candidate and of the selected one, per replication."""
    n = _n_steps(T, delta)
    d = vg_to_density_params(p)
    a, b = window
    cands = sorted(int(c) for c in candidates)
    risks = np.empty((reps, len(cands)))
    chosen = []
    for r in range(reps):
        series = simulate_vg_increments(p, delta, n, derive_seed(seed, r), backend=backend)
        sel = select_model(series, a, b, k, cands, backend)
        chosen.append(sel.m)
        for c, m in enumerate(cands):
            risks[r, c] = l2_risk(project(series, SieveSpec(a, b, m, k), backend), d)
    selected = np.array([risks[r, cands.index(m)] for r, m in enumerate(chosen)])
    mean_risk = risks.mean(axis=0)
    best = int(np.argmin(mean_risk))
    return {
        "candidates": cands,
        "selected_m": chosen,
        "risks": risks.tolist(),
        "mean_risk": mean_risk.tolist(),
        "best_fixed_m": cands[best],
        "mean_selected_risk": float(selected.mean()),
        "risk_ratio": float(selected.mean() / mean_risk[best]),
        "oracle_ratio": float(selected.mean() / risks.min(axis=1).mean()),
    }


# --------------------------------------------------------------------------
# small-time tail approximation


def smalltime_check(
    p: VarianceGammaParams,
    t_values,
    y_grid,
    mc_samples: int = 10**6,
    seed: int = 0,
    backend: str | None = None,
) -> dict:
    """Sup over ``y`` of ``|P_hat[X_t >= y]/t - nu([y, inf))|`` for each ``t``."""
    t_values = [float(t) for t in t_values]
    y = np.asarray(y_grid, dtype=float)
    if any(t <= 0 for t in t_values) or np.any(y <= 0):
        raise DomainError("smalltime_check needs t > 0 and y > 0")
    if mc_samples < 10**4:
        raise DomainError(f"mc_samples must be >= 1e4, got {mc_samples}")
    d = vg_to_density_params(p)
    tail = vg_tail_mass(d, y)
    rows = []
    for i, t in enumerate(t_values):
        x = np.sort(simulate_vg_increments(p, t, mc_samples, derive_seed(seed, i), backend=backend).values)
        count = mc_samples - np.searchsorted(x, y, side="left")
        p_hat = count / mc_samples
        ratio = p_hat / t
        err = np.abs(ratio - tail)
        se = np.sqrt(p_hat * (1.0 - p_hat) / mc_samples) / t
        j = int(np.argmax(err))
        rows.append(
            {
                "t": t,
                "sup_error": float(err[j]),
                "argmax_y": float(y[j]),
                "mc_se": float(se[j]),
                "ratio": ratio.tolist(),
                "tail_mass": tail.tolist(),
            }
        )
    ts = np.array([r["t"] for r in rows])
    errs = np.array([r["sup_error"] for r in rows])
    slope = float(np.polyfit(ts, errs, 1)[0]) if len(rows) >= 2 else float("nan")
    return {"y_grid": y.tolist(), "mc_samples": mc_samples, "seed": seed, "rows": rows, "slope": slope}


# --------------------------------------------------------------------------
# pointwise normal limit


def standardized_statistic(s_hat, s_true, c_T: float, b_fac, width: float):
    """``(c_T / b(x)) * (s_hat - s) / sigma_bar`` with ``sigma_bar^2 = s/(b-a)``."""
    s_true = np.asarray(s_true, dtype=float)
    sigma_bar = np.sqrt(s_true / width)
    return c_T / np.asarray(b_fac) * (np.asarray(s_hat) - s_true) / sigma_bar


def pointwise_clt_check(
    p: VarianceGammaParams,
    T: float,
    delta: float,
    beta: float,
    x_points,
    reps: int = 200,
    seed: int = 0,
    k: int = 0,
    window=DEFAULT_WINDOW,
    smoothness_alpha: float = 1.0,
    backend: str | None = None,
) -> dict:
    """Sample moments and KS distance of the standardised estimator at ``x``."""
    m_T, max_delta = plan_pointwise_schedule(T, smoothness_alpha, beta)
    n = _n_steps(T, delta)
    spec = SieveSpec(window[0], window[1], m_T, k)
    d = vg_to_density_params(p)
    x = np.asarray(x_points, dtype=float)
    s_true = vg_levy_density(d, x)
    c_T = math.sqrt(T / m_T)
    bf = b_factor(spec, x)
    z = np.empty((reps, x.size))
    for r in range(reps):
        series = simulate_vg_increments(p, delta, n, derive_seed(seed, r), backend=backend)
        z[r] = standardized_statistic(project(series, spec, backend)(x), s_true, c_T, bf, spec.b - spec.a)
    rows = []
    for i, xi in enumerate(x):
        col = z[:, i]
        rows.append(
            {
                "x": float(xi),
                "mean": float(col.mean()),
                "variance": float(col.var(ddof=1)) if reps > 1 else float("nan"),
                "ks": float(stats.kstest(col, "norm").statistic),
            }
        )
    return {
        "T": T,
        "delta": delta,
        "beta": beta,
        "m": m_T,
        "max_delta": max_delta,
        "delta_within_schedule": bool(delta <= max_delta),
        "window": list(window),
        "reps": reps,
        "seed": seed,
        "rows": rows,
    }


# --------------------------------------------------------------------------
# extreme-value limit of the bin maxima


def gumbel_limit_check(k: int, m: int, reps: int, y_points, seed: int = 0) -> dict:
    """Empirical CDF of ``a_m (M - b_m)`` against ``exp(-kappa' exp(-y))``.

    ``M`` is the maximum of ``m`` copies of ``|Z0|`` (``k = 0``) or of
    ``(|Z0| + sqrt(3)|Z1|)/2`` (``k = 1``).
    """
    if k not in (0, 1):
        raise DomainError(f"k must be 0 or 1, got {k}")
    if m < 100:
        raise DomainError(f"m must be >= 100, got {m}")
    if reps < 10**4:
        raise DomainError(f"reps must be >= 1e4, got {reps}")
    rng = np.random.default_rng(derive_seed(seed, k, m))
    a_m, b_m = gumbel_constants(m)
    kappa_p = 2.0 if k == 0 else 4.0
    maxima = np.empty(reps)
    chunk = max(1, 2_000_000 // m)
    for start in range(0, reps, chunk):
        size = min(chunk, reps - start)
        z = np.abs(rng.standard_normal((size, m)))
        if k == 1:
            z = 0.5 * (z + math.sqrt(3.0) * np.abs(rng.standard_normal((size, m))))
        maxima[start : start + size] = z.max(axis=1)
    scaled = np.sort(a_m * (maxima - b_m))
    rows = []
    for y in y_points:
        emp = np.searchsorted(scaled, y, side="right") / reps
        theo = math.exp(-kappa_p * math.exp(-y))
        rows.append({"y": float(y), "empirical": float(emp), "theoretical": theo, "abs_diff": abs(emp - theo)})
    return {"k": k, "m": m, "reps": reps, "seed": seed, "a_m": a_m, "b_m": b_m, "kappa_prime": kappa_p, "rows": rows}


# --------------------------------------------------------------------------
# averaged estimator and band envelopes


def figure_data(
    p: VarianceGammaParams,
    T: float,
    delta: float,
    m=40,
    k: int = 0,
    reps: int = 100,
    level: float = 0.95,
    seed: int = 0,
    window=DEFAULT_WINDOW,
    formula: str = "exact",
    grid_size: int = 512,
    candidates=DEFAULT_CANDIDATES,
    backend: str | None = None,
) -> dict:
    """Means over replications of the estimate and of both band envelopes."""
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    n = _n_steps(T, delta)
    d = vg_to_density_params(p)
    a, b = window
    grid = np.linspace(a, b, grid_size)
    acc = np.zeros((3, grid_size))
    ms = []
    for r in range(reps):
        series = simulate_vg_increments(p, delta, n, derive_seed(seed, r), backend=backend)
        m_r = select_model(series, a, b, k, candidates, backend).m if m == "auto" else int(m)
        ms.append(m_r)
        res = band(project(series, SieveSpec(a, b, m_r, k), backend), 1.0 - level, formula, grid=grid)
        acc += np.vstack([res.s_hat, res.lower, res.upper])
    acc /= reps
    return {
        "x": grid,
        "s_true": vg_levy_density(d, grid),
        "s_hat": acc[0],
        "lower": acc[1],
        "upper": acc[2],
        "m": ms,
        "reps": reps,
        "level": level,
    }

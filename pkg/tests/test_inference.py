import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levysieve.errors import DomainError, UnsupportedDegreeError
from levysieve.estimation import ProjectionEstimate
from levysieve.inference import (
    band,
    exact_band_bounds,
    gumbel_constants,
    gumbel_quantile,
    kappa_constants,
    normal_quantile,
    plan_pointwise_schedule,
    pointwise_ci,
    validate_band_schedule,
)
from levysieve.sieve_basis import SieveSpec

WINDOW = SieveSpec(0.001, 0.1, 40, 0)


def constant_estimate(value, spec=WINDOW, T=1.0, regular=True):
    coeffs = np.zeros(spec.dim)
    coeffs[:: spec.k + 1] = value * math.sqrt(spec.width)
    return ProjectionEstimate(spec, coeffs, T, 1000, regular)


class TestNormalQuantile:
    def test_examples(self):
        assert normal_quantile(0.5) == 0.0
        # 30-digit value of sqrt(2) * erfinv(0.95)
        assert normal_quantile(0.975) == pytest.approx(1.95996398454005423552, rel=1e-14)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            normal_quantile(p)


class TestGumbel:
    def test_m40(self):
        a, b = gumbel_constants(40)
        assert a == pytest.approx(math.sqrt(2 * math.log(40)), abs=1e-15)
        assert abs(a - 2.71620) < 1e-4 and abs(b - 2.01000) < 1e-4

    def test_log_log_correction_sign(self):
        # the ln ln m term is negative below m = e and near 1/(2a) at m = 15
        for m in (2, 3, 15):
            a, b = gumbel_constants(m)
            corr = a - b - math.log(4 * math.pi) / (2 * a)
            assert (corr < 0) == (m < math.e)
        a, b = gumbel_constants(15)
        assert (a - b) * 2 * a - math.log(4 * math.pi) == pytest.approx(math.log(math.log(15)), rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            gumbel_constants(1)

    def test_quantiles(self):
        assert gumbel_quantile(0.05, 2) == pytest.approx(3.663342429602109, abs=1e-12)
        assert gumbel_quantile(0.05, 4) == pytest.approx(4.356489610162054, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(alpha=st.floats(1e-6, 0.999), kp=st.floats(0.1, 10))
    def test_quantile_inverts_cdf(self, alpha, kp):
        y = gumbel_quantile(alpha, kp)
        assert math.exp(-kp * math.exp(-y)) == pytest.approx(1 - alpha, rel=1e-10)

    def test_kappa(self):
        assert kappa_constants(0, 0, 1) == (1.0, 2.0)
        assert kappa_constants(1, 0, 1) == (0.5, 4.0)
        with pytest.raises(UnsupportedDegreeError):
            kappa_constants(2, 0, 1)


class TestPointwise:
    def test_zero_estimate(self):
        assert pointwise_ci(constant_estimate(0.0), 0.05) == (0.0, 0.0)

    def test_half_width(self):
        lo, hi = pointwise_ci(constant_estimate(1000.0), 0.05)
        # sqrt(40) / sqrt(0.099) * sqrt(1000) * z_0.975
        half = 1245.834890351779
        assert hi - 1000 == pytest.approx(half, rel=1e-12)
        assert lo == 0.0  # clamped: 1000 - 1245.8 < 0

    def test_symmetric_when_unclamped(self):
        lo, hi = pointwise_ci(constant_estimate(1e6), 0.05)
        assert 1e6 - lo == pytest.approx(hi - 1e6, rel=1e-12)

    def test_linear_sieve_widens_at_edges(self):
        spec = SieveSpec(0.001, 0.1, 10, 1)
        est = constant_estimate(1e6, spec)
        mid = spec.a + 2.5 * spec.width
        edge = spec.a + 3 * spec.width - 1e-9
        w_mid = np.subtract(*pointwise_ci(est, mid)[::-1])
        w_edge = np.subtract(*pointwise_ci(est, edge)[::-1])
        assert w_edge / w_mid == pytest.approx(2.0, rel=1e-6)

    def test_open_window(self):
        with pytest.raises(DomainError):
            pointwise_ci(constant_estimate(1.0), 0.001)
        with pytest.raises(DomainError):
            pointwise_ci(constant_estimate(1.0), 0.05, level_alpha=1.5)


class TestBand:
    def test_zero_estimate_exact(self):
        res = band(constant_estimate(0.0), grid_size=64)
        assert np.all(res.lower == 0)
        np.testing.assert_allclose(res.upper, 2 * res.d_n**2, rtol=1e-15)

    def test_invariants(self):
        rng = np.random.default_rng(0)
        coeffs = rng.normal(50, 40, WINDOW.dim)
        est = ProjectionEstimate(WINDOW, coeffs, 1.0, 100)
        for formula in ("exact", "simple"):
            res = band(est, formula=formula)
            assert res.grid.size == 512 and np.all(np.diff(res.grid) > 0)
            assert np.all(res.lower >= 0) and np.all(res.lower <= res.upper)
            assert res.level == pytest.approx(0.95)
            assert set(res.constants) == {"a_m", "b_m", "kappa", "kappa_prime", "y_star"}

    def test_d_n(self):
        res = band(constant_estimate(1.0, T=3.0))
        a, b = gumbel_constants(40)
        y = gumbel_quantile(0.05, 2)
        expect = (y / a + b) * math.sqrt(40 / 3.0) / (math.sqrt(2) * math.sqrt(0.099))
        assert res.d_n == pytest.approx(expect, rel=1e-14)

    def test_exact_and_simple_agree_asymptotically(self):
        ratios = []
        for t_bar in (1e2, 1e3, 1e4):
            est = constant_estimate(500.0, T=t_bar * 40)
            ex = band(est, formula="exact", grid_size=8)
            si = band(est, formula="simple", grid_size=8)
            w_ex = (ex.upper - ex.lower)[0]
            w_si = (si.upper - si.lower)[0]
            ratios.append(abs(w_ex - w_si) / w_si)
        assert ratios[0] > ratios[1] > ratios[2]
        assert ratios[2] < 1e-3

    def test_refusals(self):
        with pytest.raises(UnsupportedDegreeError):
            band(constant_estimate(1.0, SieveSpec(0.001, 0.1, 40, 2)))
        with pytest.raises(DomainError):
            band(constant_estimate(1.0, regular=False))
        with pytest.raises(DomainError):
            band(constant_estimate(1.0, SieveSpec(0.001, 0.1, 1, 0)))
        with pytest.raises(DomainError):
            band(constant_estimate(1.0), formula="wide")

    def test_contains(self):
        res = band(constant_estimate(100.0, T=10.0), grid_size=16)
        assert np.all(res.contains(np.full(16, 100.0)))
        assert not np.any(res.contains(res.upper + 1))


@settings(max_examples=1000, deadline=None)
@given(s=st.floats(0, 1e7), d=st.floats(1e-3, 1e3))
def test_exact_bounds_solve_quadratic(s, d):
    lo, hi = exact_band_bounds(s, d)
    assert 0 <= lo <= s <= hi
    for root in (lo, hi):
        lhs = (s - root) ** 2
        rhs = 2 * d * d * root
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9 * (s + d * d) ** 2)


class TestSchedules:
    def test_pointwise_example(self):
        m, delta = plan_pointwise_schedule(100, 1, 0.3)
        assert m == 6
        assert delta == pytest.approx(100 ** -0.75)

    def test_slower_growth_near_upper_bound(self):
        ms = [plan_pointwise_schedule(1e6, 1, b)[0] for b in (0.1, 0.2, 0.3, 0.33)]
        assert ms == sorted(ms, reverse=True)

    def test_pointwise_invalid(self):
        with pytest.raises(DomainError):
            plan_pointwise_schedule(100, 1, 0.5)
        with pytest.raises(DomainError):
            plan_pointwise_schedule(100, 0.5, 0.1)

    def test_band_schedule_example(self):
        rep = validate_band_schedule(0.6, 0.15, 2)
        assert rep.ok
        assert len(rep.checks) == 4 and len({name for name, _ in rep.checks}) == 4

    def test_band_schedule_failures(self):
        assert not validate_band_schedule(1.0, 0.15, 2).ok
        rep = validate_band_schedule(0.4, 0.4, 2)
        assert not dict(rep.checks)["sieve_exponent_below_horizon_and_mesh"]

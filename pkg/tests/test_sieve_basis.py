import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levysieve.errors import DomainError, UnsupportedDegreeError
from levysieve.sieve_basis import SieveSpec, b_factor, basis_eval, basis_values, gram_matrix, legendre_eval

CLOSED_FORMS = {
    0: lambda u: np.ones_like(u),
    1: lambda u: u,
    2: lambda u: (3 * u**2 - 1) / 2,
    3: lambda u: (5 * u**3 - 3 * u) / 2,
    4: lambda u: (35 * u**4 - 30 * u**2 + 3) / 8,
    5: lambda u: (63 * u**5 - 70 * u**3 + 15 * u) / 8,
}


class TestSieveSpec:
    def test_edges_and_dim(self):
        spec = SieveSpec(0.001, 0.1, 40, 1)
        e = spec.edges
        assert e[0] == 0.001 and e[-1] == 0.1
        assert np.all(np.diff(e) > 0)
        assert spec.dim == 80

    @pytest.mark.parametrize("a,b", [(0.1, 0.001), (-0.1, 0.1), (0.0, 1.0), (1.0, 1.0)])
    def test_bad_window(self, a, b):
        with pytest.raises(DomainError):
            SieveSpec(a, b, 4, 0)

    def test_negative_window_allowed(self):
        assert SieveSpec(-0.1, -0.001, 5, 0).width == pytest.approx(0.099 / 5)

    @pytest.mark.parametrize("m,k", [(0, 0), (2, -1), (2.5, 0)])
    def test_bad_sizes(self, m, k):
        with pytest.raises(DomainError):
            SieveSpec(1.0, 2.0, m, k)

    def test_degree_cap(self):
        with pytest.raises(UnsupportedDegreeError):
            SieveSpec(1.0, 2.0, 2, 33)


class TestLegendre:
    def test_examples(self):
        assert legendre_eval(0, 0.37) == 1.0
        assert legendre_eval(1, 0.5) == 0.5
        assert legendre_eval(3, 0.4) == pytest.approx(-0.44, abs=1e-15)

    @pytest.mark.parametrize("j", sorted(CLOSED_FORMS))
    def test_recurrence_matches_closed_form(self, j):
        u = np.linspace(-1, 1, 1001)
        np.testing.assert_allclose(legendre_eval(j, u), CLOSED_FORMS[j](u), rtol=0, atol=1e-13)

    def test_bounded_and_endpoint(self):
        u = np.linspace(-1, 1, 2001)
        for j in range(33):
            vals = legendre_eval(j, u)
            assert np.max(np.abs(vals)) <= 1 + 1e-12
            assert legendre_eval(j, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_tolerance_band_is_clamped(self):
        assert legendre_eval(2, 1 + 5e-13) == pytest.approx(1.0)
        with pytest.raises(DomainError):
            legendre_eval(2, 1 + 1e-9)

    def test_degree_cap(self):
        with pytest.raises(UnsupportedDegreeError):
            legendre_eval(33, 0.0)


class TestBasis:
    def test_examples(self):
        spec = SieveSpec(1, 2, 4, 0)
        assert basis_eval(spec, 1, 0, 1.1) == pytest.approx(2.0)
        assert basis_eval(spec, 2, 0, 1.1) == 0.0
        assert basis_eval(SieveSpec(1, 2, 1, 1), 1, 1, 1.5) == pytest.approx(0.0, abs=1e-15)

    def test_index_errors(self):
        spec = SieveSpec(1, 2, 4, 1)
        for i, j in [(0, 0), (5, 0), (1, 2), (1, -1)]:
            with pytest.raises(IndexError):
                basis_eval(spec, i, j, 1.5)

    def test_right_endpoint_belongs_to_last_bin(self):
        spec = SieveSpec(1, 2, 4, 0)
        assert basis_eval(spec, 4, 0, 2.0) == pytest.approx(2.0)
        assert basis_eval(spec, 1, 0, 1.0) == pytest.approx(2.0)
        assert basis_eval(spec, 1, 0, 2.0 + 1e-9) == 0.0

    @settings(max_examples=60, deadline=None)
    @given(
        m=st.integers(1, 64),
        frac=st.lists(st.floats(0, 1), min_size=1, max_size=50),
    )
    def test_exactly_one_bin_per_point(self, m, frac):
        spec = SieveSpec(0.001, 0.1, m, 0)
        x = spec.a + np.array(frac) * (spec.b - spec.a)
        support = np.array([basis_eval(spec, i, 0, x) != 0 for i in range(1, m + 1)])
        assert np.all(support.sum(axis=0) == 1)

    def test_basis_values_matches_basis_eval(self, rng):
        spec = SieveSpec(0.5, 3.0, 7, 3)
        x = rng.uniform(0.4, 3.1, 200)
        idx, vals = basis_values(spec, x)
        for i in range(1, 8):
            for j in range(4):
                expect = np.where(idx == i - 1, vals[j], 0.0)
                np.testing.assert_array_equal(basis_eval(spec, i, j, x), expect)


class TestBFactor:
    def test_k0_is_one(self, rng):
        spec = SieveSpec(0.001, 0.1, 13, 0)
        np.testing.assert_array_equal(b_factor(spec, rng.uniform(0.001, 0.1, 50)), 1.0)

    def test_k1_midpoint_and_edge(self):
        spec = SieveSpec(0.001, 0.1, 10, 1)
        mids = spec.edges[:-1] + spec.width / 2
        np.testing.assert_allclose(b_factor(spec, mids), 1.0, atol=1e-12)
        near_right = spec.edges[1:] - 1e-13
        np.testing.assert_allclose(b_factor(spec, near_right), 2.0, atol=1e-8)
        assert b_factor(spec, spec.b) == pytest.approx(2.0)

    @settings(max_examples=40, deadline=None)
    @given(k=st.integers(0, 6), m=st.integers(1, 30), t=st.floats(0, 1))
    def test_bounds(self, k, m, t):
        spec = SieveSpec(1.0, 2.0, m, k)
        val = b_factor(spec, 1.0 + t)
        assert 1.0 - 1e-12 <= val <= k + 1 + 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            b_factor(SieveSpec(1, 2, 3, 1), 2.5)


class TestGram:
    def test_indicators(self):
        g = gram_matrix(SieveSpec(0.001, 0.1, 5, 0), 2)
        np.testing.assert_allclose(g, np.eye(5), rtol=0, atol=1e-12)

    def test_linear_sieve(self):
        g = gram_matrix(SieveSpec(0.001, 0.1, 40, 1), 8)
        assert np.max(np.abs(g - np.eye(80))) < 1e-10

    def test_odd_symmetry(self):
        g = gram_matrix(SieveSpec(1, 2, 1, 1), 4)
        assert abs(g[0, 1]) < 1e-12

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    @pytest.mark.parametrize("m", [1, 7, 64])
    def test_orthonormal(self, k, m):
        g = gram_matrix(SieveSpec(-2.0, -0.5, m, k), 2 * k + 2)
        assert np.max(np.abs(g - np.eye(m * (k + 1)))) < 1e-10

    def test_quad_order_precondition(self):
        with pytest.raises(DomainError):
            gram_matrix(SieveSpec(1, 2, 3, 2), 5)

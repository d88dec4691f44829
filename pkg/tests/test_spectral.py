import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from csmaline import (
    DIVERGENT,
    alpha_matching,
    avg_throughput_equal,
    avg_throughput_finite,
    avg_throughput_limit,
    characteristic_roots,
    series_roots,
    xi,
    z_asymptote,
    z_sequence,
    z_spectral,
)
from csmaline.spectral import pochhammer


class TestRoots:
    def test_quadratic(self):
        rs = characteristic_roots(2.0, 1)
        assert rs.dominant == pytest.approx(2.0, abs=1e-14)
        np.testing.assert_allclose(rs.roots, [2, -1], atol=1e-14)
        np.testing.assert_allclose(rs.coeffs, [4 / 3, -1 / 3], atol=1e-14)

    def test_linear(self):
        rs = characteristic_roots(1.0, 0)
        assert len(rs.roots) == 1 and rs.dominant == pytest.approx(2.0)

    @given(st.floats(1e-3, 1e4))
    def test_nearest_neighbor_dominant_closed_form(self, sigma):
        assert characteristic_roots(sigma, 1).dominant == pytest.approx((1 + math.sqrt(1 + 4 * sigma)) / 2, rel=1e-13)

    @pytest.mark.parametrize("beta", range(7))
    def test_invariants_on_log_grid(self, beta):
        for sigma in np.logspace(-3, 4, 36):
            rs = characteristic_roots(sigma, beta)
            assert len(rs.roots) == beta + 1
            assert np.all(rs.residuals() < 1e-10 * (1 + sigma))
            assert rs.dominant > 1 and abs(rs.roots[0].imag) == 0
            assert np.all(np.abs(rs.roots[1:]) < rs.dominant)
            d = np.abs(rs.roots[:, None] - rs.roots[None, :]) + np.eye(beta + 1)
            assert d.min() > 1e-8
            assert abs(rs.coeffs.sum() - 1) < 1e-9

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            characteristic_roots(0.0, 1)
        with pytest.raises(ValueError):
            characteristic_roots(1.0, -1)


class TestSpectralZ:
    def test_examples(self):
        assert z_spectral(2.0, 1, 3) == pytest.approx(11, rel=1e-14)
        assert z_spectral(1.0, 1, 5) == pytest.approx(13, rel=1e-14)
        assert z_spectral(2.0, 1, 30) / z_asymptote(2.0, 1, 30) == pytest.approx(1, abs=1e-8)

    @pytest.mark.parametrize("beta", [0, 1, 2, 3, 5])
    @pytest.mark.parametrize("sigma", [0.05, 0.5, 2.0, 9.0])
    def test_matches_recursion(self, sigma, beta):
        z = z_sequence([sigma] * 200, beta)
        rs = characteristic_roots(sigma, beta)
        for i in range(0, 201, 7):
            ref = z.value(i)
            assert abs(z_spectral(sigma, beta, i, rs) - ref) <= 1e-9 * ref


class TestAverages:
    def test_small_examples(self):
        assert avg_throughput_finite(1.0, 1, 3) == pytest.approx(1 / 3, rel=1e-12)
        assert avg_throughput_finite(6.0, 1, 5) == pytest.approx(1110 / 2315, rel=1e-12)
        assert avg_throughput_limit(2.0, 1) == pytest.approx(1 / 3, rel=1e-14)

    @pytest.mark.parametrize("beta", [1, 2, 4])
    @pytest.mark.parametrize("sigma", [0.1, 1.0, 6.0, 30.0])
    def test_finite_matches_recursion(self, sigma, beta):
        rs = characteristic_roots(sigma, beta)
        for n in (1, 2, 5, 17, 60, 200):
            assert abs(avg_throughput_finite(sigma, beta, n, rs) - avg_throughput_equal(sigma, beta, n)) < 1e-9

    def test_finite_size_correction(self):
        # for sigma=2, beta=1 the average is exactly 1/3 + 2/(9n) - 1/(9n)(-1/2)**n ... check the leading gap
        for n in (50, 100, 400):
            gap = avg_throughput_equal(Fraction(2), 1, n) - Fraction(1, 3)
            assert abs(float(gap) * n - 2 / 9) < 1e-3

    def test_limit_tends_to_half(self):
        gaps = [abs(avg_throughput_limit(10.0**k, 1) - 0.5) for k in range(1, 5)]
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert all(g < 1 / math.sqrt(10.0**k) for g, k in zip(gaps, range(1, 5)))
        assert avg_throughput_limit(1e-9, 3) < 1e-8


class TestAlphaMatching:
    def test_infinite(self):
        assert alpha_matching(2.0, 1) == pytest.approx(1.0)
        assert alpha_matching(2.0, 1, math.inf) == pytest.approx(1.0)

    def test_pairing(self):
        a = alpha_matching(6, 1, 5)
        assert a == Fraction(222, 19)
        assert abs(float(a) - 11.68) < 0.01

    def test_divergent(self):
        assert alpha_matching(19.0, 2, 10) == DIVERGENT
        assert math.isfinite(alpha_matching(19.0, 1, 10))

    @given(st.floats(0.01, 50), st.integers(1, 4), st.integers(1, 30))
    def test_inverts_fair_throughput(self, sigma, beta, n):
        a = alpha_matching(sigma, beta, n)
        if a != DIVERGENT:
            assert a / (1 + (beta + 1) * a) == pytest.approx(avg_throughput_equal(sigma, beta, n), rel=1e-9)


class TestSeries:
    def test_xi(self):
        assert xi(1) == Fraction(1, 4)
        assert xi(2) == Fraction(4, 27)

    def test_pochhammer(self):
        assert pochhammer(3.0, 0) == 1
        assert pochhammer(3.0, 4) == 3 * 4 * 5 * 6
        assert pochhammer(-0.5, 2) == pytest.approx(-0.5 * 0.5)

    def test_examples(self):
        s = series_roots(0.2, 1, terms=30)
        assert s.small_in_domain and not s.large_in_domain
        lam0 = characteristic_roots(0.2, 1).dominant
        # Catalan coefficients at 4*sigma = 0.8 leave a tail of ~5e-7 after 30 terms
        tail = sum(abs(t) for t in series_roots(0.2, 1, terms=400).small[0].terms[30:])
        assert abs(s.small[0].value - lam0) <= tail
        assert abs(series_roots(0.2, 1, terms=120).small[0].value - lam0) < 1e-8
        s = series_roots(10.0, 1, terms=30)
        assert abs(1 / s.large[0].value - 1 / characteristic_roots(10.0, 1).dominant) < 1e-8

    @pytest.mark.parametrize("beta", [1, 2, 3])
    def test_truncation_error_shrinks(self, beta):
        sigma = float(xi(beta)) / 2
        lam0 = characteristic_roots(sigma, beta).dominant
        errs = [abs(p - lam0) for p in 1 + series_roots(sigma, beta, 40).small[0].partial_sums]
        assert errs[-1] < errs[9] < errs[0]

    def test_out_of_domain_is_flagged(self):
        s = series_roots(1.0, 1)
        assert not s.small_in_domain and not any(e.in_domain for e in s.small)
        with pytest.raises(ValueError):
            series_roots(1.0, 1, terms=0)

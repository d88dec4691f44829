from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from csmaline import EnumerationTooLarge, LineNetworkConfig, stationary_distribution, throughput_exact

rates = st.fractions(min_value=Fraction(1, 20), max_value=20, max_denominator=50)


class TestKnownValues:
    def test_three_nodes_unit_rate(self):
        assert list(throughput_exact(LineNetworkConfig.equal(3, 1, 1))) == [
            Fraction(2, 5),
            Fraction(1, 5),
            Fraction(2, 5),
        ]

    def test_three_nodes_fair(self):
        theta = throughput_exact(LineNetworkConfig.fair(3, 1, 1))
        assert all(t == Fraction(1, 3) for t in theta)

    def test_five_nodes_sigma_six(self):
        theta = throughput_exact(LineNetworkConfig.equal(5, 1, 6))
        assert list(theta) == [Fraction(k, 463) for k in (330, 78, 294, 78, 330)]

    def test_float_path_agrees(self):
        cfg = LineNetworkConfig.equal(5, 1, 6)
        approx = throughput_exact(cfg, exact=False)
        assert approx.dtype == float
        np.testing.assert_allclose(approx, np.array([330, 78, 294, 78, 330]) / 463, rtol=1e-15)


class TestDistribution:
    @given(st.lists(rates, min_size=1, max_size=8), st.integers(0, 4))
    def test_matches_brute_force(self, rho, beta):
        from conftest import brute_throughput

        cfg = LineNetworkConfig.explicit(rho, beta)
        expect, z = brute_throughput(rho, beta)
        assert list(throughput_exact(cfg)) == expect
        assert stationary_distribution(cfg).z == z

    @given(st.lists(rates, min_size=2, max_size=8), st.integers(1, 3))
    def test_detailed_balance(self, rho, beta):
        cfg = LineNetworkConfig.explicit(rho, beta)
        d = stationary_distribution(cfg)
        index = {m: k for k, m in enumerate(d.space.masks.tolist())}
        assert sum(d.probs) == 1
        for m, k in index.items():
            for i in range(cfg.n):
                up = m | (1 << i)
                if up != m and up in index:
                    assert d.probs[k] * rho[i] == d.probs[index[up]]

    def test_float_detailed_balance(self):
        rng = np.random.default_rng(3)
        rho = rng.uniform(0.1, 10, 10)
        d = stationary_distribution(LineNetworkConfig.explicit(rho.tolist(), 2))
        index = {m: k for k, m in enumerate(d.space.masks.tolist())}
        for m, k in index.items():
            for i in range(10):
                up = m | (1 << i)
                if up != m and up in index:
                    assert abs(d.probs[k] * rho[i] - d.probs[index[up]]) < 1e-12

    def test_huge_rates_stay_finite(self):
        d = stationary_distribution(LineNetworkConfig.equal(20, 1, 1e40))
        assert np.isinf(d.z) and np.isfinite(d.log_z)
        assert abs(d.probs.sum() - 1) < 1e-12

    def test_exact_requires_rational(self):
        with pytest.raises(ValueError):
            stationary_distribution(LineNetworkConfig.equal(3, 1, 0.5), exact=True)

    def test_too_large(self):
        with pytest.raises(EnumerationTooLarge):
            throughput_exact(LineNetworkConfig.equal(40, 1, 1))


class TestShape:
    @given(st.integers(1, 10), st.integers(1, 3), rates)
    def test_symmetric_rates_give_mirror_throughput(self, n, beta, sigma):
        theta = list(throughput_exact(LineNetworkConfig.equal(n, beta, sigma)))
        assert theta == theta[::-1]

    @given(st.lists(rates, min_size=2, max_size=8), st.integers(1, 3), st.data())
    def test_own_rate_monotone(self, rho, beta, data):
        i = data.draw(st.integers(0, len(rho) - 1))
        before = throughput_exact(LineNetworkConfig.explicit(rho, beta))[i]
        rho2 = list(rho)
        rho2[i] = rho2[i] * 2
        after = throughput_exact(LineNetworkConfig.explicit(rho2, beta))[i]
        assert after > before

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from csmaline import (
    LineNetworkConfig,
    fair_rates,
    fair_throughput,
    throughput_exact,
    throughput_recursive,
    traffic_expansions,
    verify_fairness,
    z_sequence,
)


class TestRates:
    def test_examples(self):
        assert fair_rates(3, 1, 1).rho == (1, 2, 1)
        assert fair_rates(6, 2, 1).rho == (1, 2, 4, 4, 2, 1)
        assert fair_rates(5, 1, Fraction(1, 2)).exponents == (0, 1, 1, 1, 0)

    def test_large_alpha_overflow(self):
        v = fair_rates(400, 200, 1e6)
        assert math.isinf(max(v.rho))
        assert np.all(np.isfinite(v.log_rho))

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            fair_rates(3, 1, 0)


class TestFairness:
    @pytest.mark.parametrize("alpha", [Fraction(1, 10), 1, 10])
    def test_exact_equal_throughput(self, alpha):
        for n in range(1, 11):
            for beta in range(0, n):
                cfg = LineNetworkConfig.fair(n, beta, alpha)
                target = fair_throughput(alpha, beta)
                assert all(t == target for t in throughput_exact(cfg))
                assert all(t == target for t in throughput_recursive(cfg))

    def test_examples(self):
        assert verify_fairness(LineNetworkConfig.fair(10, 3, 2)) < 1e-12
        cfg = LineNetworkConfig.fair(4, 3, 1)
        assert verify_fairness(cfg) < 1e-12
        assert all(t == Fraction(1, 5) for t in throughput_exact(cfg))
        assert verify_fairness(LineNetworkConfig.equal(12, 1, 1)) > 0.01

    def test_pairing_value(self):
        assert fair_throughput(Fraction(222, 19), 1) == Fraction(1110, 2315)

    @given(st.integers(1, 40), st.data(), st.floats(0.01, 100))
    def test_float_path(self, n, data, alpha):
        beta = data.draw(st.integers(0, n - 1))
        assert verify_fairness(LineNetworkConfig.fair(n, beta, alpha), max_nodes=14) < 1e-10

    def test_beyond_line_length(self):
        # blocking range longer than the line: every pair blocks, rates stay equal
        assert verify_fairness(LineNetworkConfig.fair(4, 6, 2)) < 1e-12

    def test_throughput_monotone_and_bounded(self):
        for beta in range(4):
            vals = [fair_throughput(a, beta) for a in np.logspace(-3, 6, 50)]
            assert all(b > a for a, b in zip(vals, vals[1:]))
            assert vals[-1] < 1 / (beta + 1)

    def test_all_but_one_blocked(self):
        n = 7
        assert fair_throughput(3.0, n - 2) == pytest.approx(3.0 / (1 + (n - 1) * 3.0))


class TestNormalization:
    @pytest.mark.parametrize("alpha", [0.1, 1.0, 10.0])
    def test_geometric_prefix_and_total(self, alpha):
        for n in range(1, 21):
            for beta in range(0, n):
                z = z_sequence(fair_rates(n, beta, alpha).rho, beta)
                for i in range(0, n - beta + 1):
                    assert abs(z.value(i) / (1 + alpha) ** i - 1) < 1e-12
                total = (1 + alpha) ** (n - beta - 1) * (1 + (beta + 1) * alpha)
                assert abs(z.value(n) / total - 1) < 1e-12


class TestExpansions:
    def test_examples(self):
        light, heavy = traffic_expansions(5, 1, 0.01, 1)
        assert light == 0.01 and fair_rates(5, 1, 0.01).rho[0] - light == 0
        light, heavy = traffic_expansions(5, 1, 0.01, 3)
        assert light == pytest.approx(0.0101)
        assert abs(fair_rates(5, 1, 0.01).rho[2] - light) <= 2e-6
        assert heavy == 2

    def test_bad_index(self):
        with pytest.raises(ValueError):
            traffic_expansions(5, 1, 1.0, 6)

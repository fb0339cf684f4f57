"""Tests for the special-function layer and kernel integrals."""

import math

import numpy as np
import pytest
from scipy.special import gammaln

from supnorm.kernels import (
    chebyshev_T2k,
    digamma,
    digamma_combo,
    faddeev_transfer,
    g_k_difference,
    gamma_ratio_bound,
    heat_kernel,
    integrated_exponential_lhs,
    parabolic_sum_bound,
    r_factor,
    resolvent_G,
    resolvent_via_heat,
    run_kernel_checks,
)

E54 = math.exp(1.25)


def digamma_at_one_oracle(n: int = 200000) -> float:
    # psi(1) = -(lim H_n - ln n), with the Euler-Maclaurin correction terms
    h = math.fsum(1.0 / m for m in range(1, n + 1))
    gamma = h - math.log(n) - 1.0 / (2.0 * n) + 1.0 / (12.0 * n * n)
    return -gamma


def digamma_asymptotic_oracle(x: float) -> float:
    # ln x - 1/(2x) - sum B_{2n} / (2n x^{2n}); adequate for x >= 10
    inv2 = 1.0 / (x * x)
    series = inv2 * (
        1.0 / 12.0
        - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0)))
    )
    return math.log(x) - 1.0 / (2.0 * x) - series


def stirling_lgamma_oracle(x: float) -> float:
    # shift into the asymptotic regime, then the Stirling series
    shift = 0.0
    while x < 12.0:
        shift += math.log(x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = inv * (
        1.0 / 12.0
        - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0)))
    )
    return (x - 0.5) * math.log(x) - x + 0.5 * math.log(2.0 * math.pi) + series - shift


class TestDigamma:
    def test_at_one(self):
        assert digamma(1.0) == pytest.approx(digamma_at_one_oracle(), abs=1e-12)

    def test_functional_equation(self):
        assert digamma(2.0) == pytest.approx(digamma(1.0) + 1.0, abs=1e-14)
        for x in (0.3, 1.7, 9.2):
            assert digamma(x + 1.0) - digamma(x) == pytest.approx(1.0 / x, rel=1e-12)

    def test_against_asymptotic_series(self):
        assert digamma(10.5) == pytest.approx(digamma_asymptotic_oracle(10.5), abs=1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            digamma(0.0)
        with pytest.raises(ValueError):
            digamma(-1.5)


class TestLogGamma:
    # the library log-gamma backing the kernel prefactors, against the
    # Stirling-series recursion
    @pytest.mark.parametrize("x", [1.0, 1.5, 2.5, 7.3, 10.5, 100.1, 5000.0])
    def test_against_stirling_series(self, x):
        assert float(gammaln(x)) == pytest.approx(
            stirling_lgamma_oracle(x), rel=1e-12, abs=1e-12
        )


class TestDigammaCombo:
    def test_small_case(self):
        assert digamma_combo(1, 0.5) == pytest.approx(-2.4, rel=1e-14)

    def test_k6(self):
        assert digamma_combo(6, 0.1) == pytest.approx(-2.0 * 6.1 / (0.1 * 12.1), rel=1e-14)

    def test_matches_four_term_sum(self):
        for k in (1, 3, 10):
            for eps in (0.01, 0.3, 0.9):
                direct = (
                    digamma(2 * k + eps)
                    + digamma(eps)
                    - digamma(2 * k + 1 + eps)
                    - digamma(1 + eps)
                )
                assert digamma_combo(k, eps) == pytest.approx(direct, rel=1e-9)

    def test_always_negative(self):
        for k in (1, 2, 5, 20):
            for eps in (1e-4, 0.1, 0.99):
                assert digamma_combo(k, eps) < 0.0


class TestRFactor:
    def test_unit_case(self):
        assert r_factor(1, 1.0) == pytest.approx(1.0 / 3.0, rel=1e-15)

    def test_scaled_limit(self):
        for k in (1, 4, 9):
            assert 1e-8 * r_factor(k, 1e-8) == pytest.approx(1.0 / (2 * k - 1), rel=1e-6)

    def test_positive(self):
        for k in (1, 2, 7):
            for eps in (0.01, 0.5, 0.99):
                assert r_factor(k, eps) > 0.0


class TestChebyshev:
    def test_at_one(self):
        for k in (1, 2, 10):
            assert chebyshev_T2k(k, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_degree_four_polynomial(self):
        # T_4(x) = 8x^4 - 8x^2 + 1
        assert chebyshev_T2k(2, 2.0) == pytest.approx(97.0, rel=1e-12)

    def test_exponential_domination(self):
        for k in (1, 2, 5, 13, 27, 50):
            for r in np.linspace(0.0, 10.0, 81):
                assert chebyshev_T2k(k, math.cosh(r / 2.0)) <= math.exp(k * r) * (1 + 1e-12)

    def test_domain(self):
        with pytest.raises(ValueError):
            chebyshev_T2k(3, 0.999)


class TestGammaRatio:
    def test_at_one(self):
        g = gamma_ratio_bound(1.0)
        assert g.ratio == pytest.approx(math.sqrt(math.pi), rel=1e-14)
        assert g.bound == pytest.approx(E54, rel=1e-14)

    def test_at_ten(self):
        g = gamma_ratio_bound(10.0)
        # Gamma(9.5)/Gamma(10) = sqrt(pi) * prod_{j=0..8}(j+1/2) / 9!
        num = math.sqrt(math.pi)
        for j in range(9):
            num *= j + 0.5
        expected = num / math.factorial(9)
        assert g.ratio == pytest.approx(expected, rel=1e-13)
        assert g.ratio <= g.bound
        assert g.bound == pytest.approx(E54 / math.sqrt(10.0), rel=1e-14)

    def test_asymptotics(self):
        g = gamma_ratio_bound(1e6)
        assert g.ratio * math.sqrt(1e6) == pytest.approx(1.0, abs=1e-5)

    def test_domain(self):
        with pytest.raises(ValueError):
            gamma_ratio_bound(0.5)


class TestResolvent:
    def test_large_sigma_asymptote(self):
        k, s, sigma = 2, 3.5, 1e8
        lead = math.exp(gammaln(s + k) + gammaln(s - k) - gammaln(2 * s)) / (4 * math.pi)
        assert resolvent_G(k, s, sigma) * sigma**s == pytest.approx(lead, rel=1e-7)

    def test_positive_on_grid(self):
        for k in (1, 2, 6):
            for eps in (0.1, 0.7):
                for sigma in (1.2, 2.0, 50.0):
                    assert resolvent_G(k, k + eps, sigma) > 0.0

    def test_singular_point(self):
        with pytest.raises(ValueError):
            resolvent_G(1, 2.0, 1.0)

    def test_spectral_parameter_domain(self):
        with pytest.raises(ValueError):
            resolvent_G(3, 2.5, 2.0)


class TestDifferenceKernel:
    @pytest.mark.parametrize("k", [1, 2, 6])
    @pytest.mark.parametrize("eps", [0.1, 0.5])
    @pytest.mark.parametrize("sigma", [1.5, 2.0, 10.0])
    def test_dual_routes_agree(self, k, eps, sigma):
        # g_k_difference raises internally if the series difference and the
        # radial quadrature drift past 1e-6 relative
        value = g_k_difference(k, k + eps, sigma)
        assert value > 0.0

    @pytest.mark.parametrize("k", [1, 2, 6])
    @pytest.mark.parametrize("eps", [0.1, 0.5])
    @pytest.mark.parametrize("sigma", [1.5, 2.0, 10.0])
    def test_decay_bound(self, k, eps, sigma):
        value = g_k_difference(k, k + eps, sigma)
        assert value <= 3.0 / (2.0 * math.pi * eps) * sigma ** -(k + eps)

    @pytest.mark.parametrize("k", [1, 2, 6])
    @pytest.mark.parametrize("eps", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("sigma", [1.5, 2.0, 10.0])
    def test_integrated_exponential_bound(self, k, eps, sigma):
        rho = 2.0 * math.acosh(math.sqrt(sigma))
        lhs = integrated_exponential_lhs(k, eps, rho)
        assert lhs <= 3.0 * math.sqrt(2.0) / eps * math.exp(-eps * rho) * (1 + 1e-12)


class TestHeatKernel:
    def test_monotone_in_rho(self):
        for k in (1, 3):
            for t in (0.3, 1.0, 2.5):
                vals = [heat_kernel(k, t, rho) for rho in (0.0, 0.3, 0.8, 1.6, 3.0)]
                assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_dominated_by_origin_value(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            k = int(rng.integers(1, 5))
            t = float(rng.uniform(0.1, 2.0))
            rho = float(rng.uniform(0.05, 4.0))
            assert heat_kernel(k, t, rho) <= heat_kernel(k, t, 0.0)

    def test_domain(self):
        with pytest.raises(ValueError):
            heat_kernel(1, 0.0, 1.0)
        with pytest.raises(ValueError):
            heat_kernel(1, 1.0, -0.5)

    @pytest.mark.parametrize("k,s,sigma", [(1, 2.0, 2.0), (1, 1.8, 3.5), (2, 3.0, 2.5)])
    def test_transform_recovers_resolvent(self, k, s, sigma):
        direct = resolvent_G(k, s, sigma)
        via_heat = resolvent_via_heat(k, s, sigma)
        assert via_heat == pytest.approx(direct, rel=1e-4)


class TestParabolicBound:
    def test_value_at_26(self):
        expected = 26.0 * E54 / (math.sqrt(math.pi) * math.sqrt(26.0 + 1e-9))
        assert parabolic_sum_bound(26, 1e-9) == pytest.approx(expected, rel=1e-14)
        # the eps -> 0 shape sqrt(k) e^{5/4} / sqrt(pi)
        assert parabolic_sum_bound(26, 1e-12) == pytest.approx(
            math.sqrt(26.0) * E54 / math.sqrt(math.pi), rel=1e-9
        )

    def test_stirling_step(self):
        # k Gamma(k-1/2+eps)/(sqrt(pi) Gamma(k+eps)) <= bound
        for k in (2, 10, 26):
            for eps in (0.01, 0.5):
                mid = k * math.exp(gammaln(k - 0.5 + eps) - gammaln(k + eps)) / math.sqrt(math.pi)
                assert mid <= parabolic_sum_bound(k, eps)


class TestFaddeevTransfer:
    def test_adjacent_exponents(self):
        # d2 = d1 + 1 kills the 64/15 power
        y0, y, d1 = 1.3, 2.6, 1.2
        expected = y0 ** (-2 * d1 - 2) * y ** (-2 * (d1 + 1) + 4 * d1 + 4)
        assert faddeev_transfer(y0, y, d1, d1 + 1) == pytest.approx(expected, rel=1e-14)

    def test_general_value(self):
        y0, y, d1, d2 = 2.0, 4.0, 1.1, 3.6
        expected = (64 / 15) ** (d2 - d1 - 1) * y0 ** (-2 * d1 - 2) * y ** (-2 * d2 + 4 * d1 + 4)
        assert faddeev_transfer(y0, y, d1, d2) == pytest.approx(expected, rel=1e-14)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            faddeev_transfer(2.0, 3.9, 1.0, 2.0)  # y < 2*y0
        with pytest.raises(ValueError):
            faddeev_transfer(2.0, 4.0, 1.0, 1.5)  # d2 < d1 + 1
        with pytest.raises(ValueError):
            faddeev_transfer(0.0, 1.0, 1.0, 2.0)

    def test_height_floor_identity(self):
        # (16/sqrt(15))^2 / 4 equals 64/15 exactly, so the floor height makes
        # (64/15)^(k-2) <= Y^(2k-4)/4^(k-2) an equality
        Y = 16.0 / math.sqrt(15.0)
        assert Y * Y / 4.0 == pytest.approx(64.0 / 15.0, rel=1e-15)
        for k in range(2, 40):
            assert (64.0 / 15.0) ** (k - 2) <= (Y ** (2 * k - 4) / 4.0 ** (k - 2)) * (1 + 1e-12)


def test_check_suite_passes():
    results = run_kernel_checks()
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_check_suite_fails_on_absurd_tolerance():
    results = run_kernel_checks(transform_tol=1e-16)
    transform = [r for r in results if r.name == "heat_resolvent_transform"]
    assert len(transform) == 1 and not transform[0].passed

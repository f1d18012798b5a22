import numpy as np
import pytest
from scipy import special
from scipy.integrate import quad

from claimcast.errors import DomainError
from claimcast.sim import make_rng, sample_stable
from claimcast.stable import (
    StableParams,
    params_eq_one_case,
    params_mean_case,
    params_zero_one_case,
    stable_cdf,
    stable_quantile,
)


class TestParamsMeanCase:
    def test_car_study_sigma(self):
        p = params_mean_case(1.52)
        assert p.sigma == pytest.approx(1.8688, abs=5e-5)
        assert p.mu == 0.0
        assert p.beta == 1.0

    def test_alpha_three_halves_closed_form(self):
        # -Gamma(0.5)/0.5 * cos(0.75 pi) = sqrt(pi) * sqrt(2) = sqrt(2 pi),
        # so sigma = (2 pi)^(1/3)
        p = params_mean_case(1.5)
        assert p.sigma == pytest.approx((2.0 * np.pi) ** (1.0 / 3.0), rel=1e-12)

    @pytest.mark.parametrize("alpha", [1.0, 2.0, 0.5, 2.5])
    def test_domain(self, alpha):
        with pytest.raises(DomainError):
            params_mean_case(alpha)

    def test_sigma_positive_across_range(self):
        for alpha in np.linspace(1.01, 1.99, 25):
            assert params_mean_case(float(alpha)).sigma > 0.0


class TestParamsZeroOneCase:
    def test_half_alpha_closed_form(self):
        # Gamma(0.5) cos(pi/4) = sqrt(pi) sqrt(2)/2 = sqrt(pi/2); squared = pi/2
        p = params_zero_one_case(0.5, 1.0)
        assert p.mu == pytest.approx(-1.0)
        assert p.sigma == pytest.approx(np.pi / 2.0, rel=1e-12)
        assert p.beta == 1.0

    def test_intensity_scaling_homogeneity(self):
        alpha = 0.7
        base = params_zero_one_case(alpha, 1.3)
        scaled = params_zero_one_case(alpha, 5.0 * 1.3)
        assert scaled.sigma == pytest.approx(
            5.0 ** (1.0 / alpha) * base.sigma, rel=1e-12
        )

    def test_domain(self):
        with pytest.raises(DomainError):
            params_zero_one_case(1.2, 1.0)
        with pytest.raises(DomainError):
            params_zero_one_case(0.5, 0.0)


class TestParamsEqOneCase:
    def test_sigma_linear_in_intensity(self):
        assert params_eq_one_case(2.0).sigma == pytest.approx(np.pi)

    def test_location_integral_two_independent_schemes(self):
        # scheme 1: integrate by parts, tail = sin(1) - Ci(1)
        head = quad(lambda z: (np.sin(z) - z) / z**2, 0.0, 1.0, epsabs=1e-14)[0]
        by_parts = head + np.sin(1.0) - special.sici(1.0)[1]
        # scheme 2: power series of (sin z - z)/z^2 on [0, 1] plus the same
        # closed-form tail computed from scratch
        k = np.arange(1, 30)
        series = np.sum((-1.0) ** k / ((2 * k) * special.factorial(2 * k + 1)))
        tail = np.sin(1.0) - special.sici(1.0)[1]
        assert by_parts == pytest.approx(series + tail, abs=1e-12)
        got = params_eq_one_case(1.0).mu
        assert got == pytest.approx(by_parts, abs=1e-10)
        # the integral happens to equal 1 - Euler-Mascheroni; keep as anchor
        assert got == pytest.approx(1.0 - np.euler_gamma, abs=1e-9)
        assert got == pytest.approx(0.4227843350984672, abs=1e-9)

    def test_location_linear_in_intensity(self):
        assert params_eq_one_case(3.0).mu == pytest.approx(
            3.0 * params_eq_one_case(1.0).mu
        )


class TestStableParamsValidation:
    def test_bounds(self):
        with pytest.raises(DomainError):
            StableParams(2.0, 0.0, 1.0, 0.0)
        with pytest.raises(DomainError):
            StableParams(1.5, 1.5, 1.0, 0.0)
        with pytest.raises(DomainError):
            StableParams(1.5, 0.0, 0.0, 0.0)


class TestCauchyClosedForm:
    def test_cdf_on_grid(self):
        p = StableParams(1.0, 0.0, 1.0, 0.0)
        xs = np.linspace(-40.0, 40.0, 100)
        want = 0.5 + np.arctan(xs) / np.pi
        got = stable_cdf(p, xs)
        assert np.max(np.abs(got - want)) < 1e-8

    def test_scaled_shifted(self):
        p = StableParams(1.0, 0.0, 2.5, -3.0)
        xs = np.linspace(-30.0, 30.0, 41)
        want = 0.5 + np.arctan((xs + 3.0) / 2.5) / np.pi
        assert np.max(np.abs(stable_cdf(p, xs) - want)) < 1e-8

    def test_quantile_closed_form(self):
        p = StableParams(1.0, 0.0, 1.0, 0.0)
        assert stable_quantile(p, 0.75) == pytest.approx(1.0, abs=1e-9)
        assert stable_quantile(p, 0.5) == pytest.approx(0.0, abs=1e-9)
        p2 = StableParams(1.0, 0.0, 2.0, 5.0)
        for lvl in (0.1, 0.3, 0.9):
            want = 5.0 + 2.0 * np.tan(np.pi * (lvl - 0.5))
            assert stable_quantile(p2, lvl) == pytest.approx(want, abs=1e-8)


class TestLevyClosedForm:
    # S1(alpha=1/2, beta=1, sigma, mu) is the one-sided law with scale sigma
    # shifted to start at mu: cdf(x) = erfc(sqrt(sigma / (2 (x - mu))))
    @pytest.mark.parametrize("sigma,mu", [(1.0, 0.0), (2.0, 3.0), (0.5, -1.0)])
    def test_cdf_matches(self, sigma, mu):
        p = StableParams(0.5, 1.0, sigma, mu)
        xs = mu + sigma * np.array([1e-3, 0.05, 0.3, 1.0, 5.0, 40.0, 1e3, 1e5])
        want = special.erfc(np.sqrt(sigma / (2.0 * (xs - mu))))
        got = stable_cdf(p, xs)
        assert np.max(np.abs(got - want)) < 1e-6

    def test_support_edge(self):
        p = StableParams(0.5, 1.0, 2.0, 3.0)
        assert stable_cdf(p, 3.0) < 1e-8
        assert stable_cdf(p, 2.0) == 0.0
        assert stable_cdf(p, -50.0) == 0.0

    def test_mirrored_support(self):
        p = StableParams(0.5, -1.0, 2.0, 3.0)
        assert stable_cdf(p, 3.0) > 1.0 - 1e-8
        assert stable_cdf(p, 50.0) == 1.0


class TestAgainstScipy:
    """scipy's independent stable implementation as an extra oracle."""

    @pytest.mark.parametrize(
        "alpha,beta",
        [(1.52, 1.0), (1.9, 0.0), (0.6, 1.0), (1.0, 1.0), (0.8, -0.4), (1.3, 0.5)],
    )
    def test_cdf_grid(self, alpha, beta):
        from scipy.stats import levy_stable

        old = levy_stable.parameterization
        try:
            levy_stable.parameterization = "S1"
            p = StableParams(alpha, beta, 1.3, 0.4)
            xs = np.array([-8.0, -2.0, -0.5, 0.0, 0.4, 1.0, 3.0, 9.0, 60.0])
            want = levy_stable.cdf(xs, alpha, beta, loc=0.4, scale=1.3)
            got = stable_cdf(p, xs)
            assert np.max(np.abs(got - want)) < 5e-8
        finally:
            levy_stable.parameterization = old

    def test_s0_location_conversion(self):
        # same law expressed in S0 coordinates: mu0 = mu1 + beta sigma tan(pi a/2)
        from scipy.stats import levy_stable

        alpha, beta, sigma, mu1 = 1.52, 1.0, 1.8688, 0.7
        mu0 = mu1 + beta * sigma * np.tan(np.pi * alpha / 2.0)
        old = levy_stable.parameterization
        try:
            levy_stable.parameterization = "S0"
            want = levy_stable.cdf([0.0, 2.0, 10.0], alpha, beta, loc=mu0, scale=sigma)
        finally:
            levy_stable.parameterization = old
        got = stable_cdf(StableParams(alpha, beta, sigma, mu1), [0.0, 2.0, 10.0])
        assert np.max(np.abs(got - want)) < 5e-8


class TestCdfShape:
    @pytest.mark.parametrize(
        "params",
        [
            StableParams(1.52, 1.0, 1.8688, 0.0),
            StableParams(0.6, 1.0, 1.0, 0.0),
            StableParams(1.9, 0.0, 1.0, 0.0),
        ],
    )
    def test_monotone_and_limits(self, params):
        xs = np.linspace(-60.0, 120.0, 200)
        cdf = stable_cdf(params, xs)
        assert np.all(np.diff(cdf) >= -1e-12)
        assert cdf[0] < 0.05
        assert cdf[-1] > 0.9
        assert stable_cdf(params, -1e9) < 1e-8
        assert stable_cdf(params, 1e12) > 1.0 - 1e-6


class TestQuantileRoundTrip:
    @pytest.mark.parametrize("alpha", [0.6, 1.0, 1.52, 1.9])
    @pytest.mark.parametrize("beta", [0.0, 1.0])
    def test_quantile_cdf_round_trip(self, alpha, beta):
        params = StableParams(alpha, beta, 1.0, 0.0)
        for p in (0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99):
            q = stable_quantile(params, p)
            assert stable_cdf(params, q) == pytest.approx(p, abs=1e-6)

    def test_cdf_quantile_round_trip_on_x_grid(self):
        params = StableParams(1.52, 1.0, 1.8688, 0.0)
        for x in np.linspace(-4.0, 18.0, 9):
            c = stable_cdf(params, x)
            if 1e-8 < c < 1.0 - 1e-8:
                assert stable_quantile(params, c) == pytest.approx(x, abs=1e-6)

    def test_quantile_monotone(self):
        params = StableParams(0.8, 1.0, 2.0, 1.0)
        qs = [stable_quantile(params, p) for p in np.linspace(0.05, 0.95, 10)]
        assert np.all(np.diff(qs) > 0.0)

    def test_level_domain(self):
        params = StableParams(1.5, 0.0, 1.0, 0.0)
        for bad in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(DomainError):
                stable_quantile(params, bad)


class TestSamplerCrossCheck:
    """The polar-transform sampler and the quadrature CDF must agree."""

    @pytest.mark.parametrize(
        "params",
        [
            StableParams(1.52, 1.0, 1.8688, 0.0),
            StableParams(0.7, 1.0, 1.0, -0.5),
            StableParams(1.0, 1.0, np.pi / 2.0, 0.42),
        ],
    )
    def test_ks_within_one_percent(self, params):
        rng = make_rng(4242, int(1000 * params.alpha))
        draws = np.sort(sample_stable(params, 1_000_000, rng))
        ps = np.linspace(0.005, 0.995, 199)
        grid = np.array([stable_quantile(params, p) for p in ps])
        emp = np.searchsorted(draws, grid, side="right") / len(draws)
        assert np.max(np.abs(emp - ps)) < 0.01

"""Tests for the F-tail machinery.

Reference values come from three independent oracles, all reproducible
from this file: adaptive quadrature of the beta density, a
high-precision mixture series evaluated with mpmath, and closed forms
that exist for special parameter values (binomial tails for integer
shapes, the arcsine law for half-integer shapes).  The frozen constants
below were computed with those oracles and are asserted against the
package's own continued-fraction and recurrence implementations.
"""

import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from wedgepower.distributions import (
    FTail,
    central_f_cdf,
    central_f_quantile,
    noncentral_f_cdf,
    power_from_f,
    regularized_incomplete_beta,
)

REL = 1e-12
ROUND_TRIP_TOL = 1e-9
REDUCTION_TOL = 1e-10


def ibeta_quadrature(a: float, b: float, x: float) -> float:
    """Oracle: integrate the beta density directly."""
    ln_norm = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)

    def density(t: float) -> float:
        return math.exp((a - 1) * math.log(t) + (b - 1) * math.log1p(-t) - ln_norm)

    value, _ = quad(density, 0.0, x, epsabs=1e-14, epsrel=1e-13)
    return value


def ncf_cdf_series(x: float, ndf: int, ddf: int, lam: float) -> float:
    """Oracle: mixture series from j=0 at 40 working digits."""
    with mp.workdps(40):
        a = mp.mpf(ndf) / 2
        b = mp.mpf(ddf) / 2
        u = mp.mpf(ndf) * x / (mp.mpf(ndf) * x + ddf)
        half = mp.mpf(lam) / 2
        total = mp.mpf(0)
        for j in range(400):
            weight = mp.e ** (-half) * half**j / mp.factorial(j)
            total += weight * mp.betainc(a + j, b, 0, u, regularized=True)
        return float(total)


def f_quantile_bisection(p: float, ndf: int, ddf: int) -> float:
    """Oracle: pure bisection on the cdf, independent of the Newton path."""
    lo, hi = 0.0, 1.0
    while central_f_cdf(hi, ndf, ddf) < p:
        lo, hi = hi, hi * 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if central_f_cdf(mid, ndf, ddf) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestRegularizedIncompleteBeta:
    def test_endpoints(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0

    def test_uniform_case(self):
        # a = b = 1 is the uniform cdf
        for x in (0.1, 0.25, 0.7, 0.99):
            assert regularized_incomplete_beta(1.0, 1.0, x) == pytest.approx(x, rel=REL)

    def test_symmetry_at_half(self):
        for a in (0.5, 1.0, 2.5, 7.0, 31.0):
            assert regularized_incomplete_beta(a, a, 0.5) == pytest.approx(0.5, rel=REL)

    def test_integer_shapes_binomial_closed_form(self):
        # I_x(3, 5) = P(Bin(7, x) >= 3); at x = 0.4 that is exactly 0.580096
        assert regularized_incomplete_beta(3.0, 5.0, 0.4) == pytest.approx(
            0.580096, rel=REL
        )

    def test_arcsine_closed_form(self):
        # a = b = 1/2: I_x = (2/pi) asin(sqrt(x))
        for x in (0.1, 0.3, 0.62, 0.9):
            expected = (2.0 / math.pi) * math.asin(math.sqrt(x))
            assert regularized_incomplete_beta(0.5, 0.5, x) == pytest.approx(
                expected, rel=REL
            )

    def test_frozen_quadrature_values(self):
        # computed with ibeta_quadrature above
        cases = [
            (3.0, 5.0, 0.4, 0.580096),
            (2.5, 7.0, 0.15, 0.22449093026249464),
            (0.5, 0.5, 0.3, 0.3690101195655454),
            (16.0, 0.5, 0.97, 0.327281509279153),
        ]
        for a, b, x, frozen in cases:
            got = regularized_incomplete_beta(a, b, x)
            assert got == pytest.approx(frozen, rel=1e-11)
            assert got == pytest.approx(ibeta_quadrature(a, b, x), rel=1e-10)

    def test_against_high_precision_grid(self):
        for a in (0.5, 1.5, 4.0, 22.0):
            for b in (0.5, 2.0, 9.5, 40.0):
                for x in (0.03, 0.3, 0.5, 0.82, 0.99):
                    with mp.workdps(30):
                        want = float(mp.betainc(a, b, 0, x, regularized=True))
                    assert regularized_incomplete_beta(a, b, x) == pytest.approx(
                        want, rel=1e-10, abs=1e-14
                    )

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            regularized_incomplete_beta(0.0, 1.0, 0.5)
        with pytest.raises(ValueError):
            regularized_incomplete_beta(1.0, -2.0, 0.5)
        with pytest.raises(ValueError):
            regularized_incomplete_beta(1.0, 1.0, 1.5)

    @given(
        a=st.floats(0.5, 50.0),
        b=st.floats(0.5, 50.0),
        x=st.floats(0.01, 0.99),
        bump=st.floats(0.001, 0.2),
    )
    def test_monotone_in_x(self, a, b, x, bump):
        hi = min(x + bump, 1.0)
        assert regularized_incomplete_beta(a, b, x) <= regularized_incomplete_beta(
            a, b, hi
        ) + 1e-12


class TestCentralFCdf:
    def test_zero_and_negative(self):
        assert central_f_cdf(0.0, 3, 7) == 0.0
        assert central_f_cdf(-2.0, 3, 7) == 0.0

    def test_median_of_symmetric_case(self):
        # equal degrees of freedom put the median exactly at 1
        for d in (1, 2, 7, 32, 200):
            assert central_f_cdf(1.0, d, d) == pytest.approx(0.5, rel=REL)

    def test_one_one_closed_form(self):
        # F(1,1) cdf is (2/pi) atan(sqrt(x))
        for x in (0.2, 1.0, 5.0, 100.0):
            expected = (2.0 / math.pi) * math.atan(math.sqrt(x))
            assert central_f_cdf(x, 1, 1) == pytest.approx(expected, rel=REL)

    def test_frozen_values(self):
        # computed from the beta-density quadrature oracle via the
        # x -> ndf*x/(ndf*x + ddf) change of variable
        cases = [
            (4.149, 1, 32, 0.9499974667249982),
            (2.0, 3, 17, 0.8477595186888573),
            (0.5, 5, 5, 0.23251131913037862),
            (10.0, 2, 2, 0.9090909090909091),
        ]
        for x, ndf, ddf, frozen in cases:
            assert central_f_cdf(x, ndf, ddf) == pytest.approx(frozen, rel=1e-12)
            u = ndf * x / (ndf * x + ddf)
            assert central_f_cdf(x, ndf, ddf) == pytest.approx(
                ibeta_quadrature(ndf / 2.0, ddf / 2.0, u), rel=1e-10
            )

    def test_df_validation(self):
        with pytest.raises(ValueError):
            central_f_cdf(1.0, 0, 5)
        with pytest.raises(ValueError):
            central_f_cdf(1.0, 2, -1)
        with pytest.raises(ValueError):
            central_f_cdf(1.0, 2.5, 5)


class TestCentralFQuantile:
    def test_p_zero(self):
        assert central_f_quantile(0.0, 3, 9) == 0.0

    def test_median_symmetric(self):
        for d in (1, 4, 25):
            assert central_f_quantile(0.5, d, d) == pytest.approx(1.0, rel=1e-10)

    def test_frozen_critical_values(self):
        # computed with f_quantile_bisection above
        cases = [
            (0.95, 1, 32, 4.149097445699548),
            (0.95, 1, 7, 5.591447851220738),
            (0.99, 3, 17, 5.18499991729522),
            (0.95, 1, 45, 4.056612461101311),
        ]
        for p, ndf, ddf, frozen in cases:
            got = central_f_quantile(p, ndf, ddf)
            assert got == pytest.approx(frozen, rel=1e-10)
            assert got == pytest.approx(f_quantile_bisection(p, ndf, ddf), rel=1e-10)

    def test_round_trip_grid(self):
        for p in (0.001, 0.05, 0.3, 0.5, 0.9, 0.975, 0.999):
            for ndf, ddf in ((1, 1), (1, 7), (3, 17), (10, 123), (2, 2), (1, 100000)):
                x = central_f_quantile(p, ndf, ddf)
                assert central_f_cdf(x, ndf, ddf) == pytest.approx(
                    p, abs=ROUND_TRIP_TOL
                )

    @settings(max_examples=150)
    @given(
        p=st.floats(0.001, 0.999),
        ndf=st.integers(1, 200),
        ddf=st.integers(1, 500),
    )
    def test_round_trip_property(self, p, ndf, ddf):
        x = central_f_quantile(p, ndf, ddf)
        assert abs(central_f_cdf(x, ndf, ddf) - p) <= ROUND_TRIP_TOL

    def test_domain(self):
        with pytest.raises(ValueError):
            central_f_quantile(1.0, 2, 3)
        with pytest.raises(ValueError):
            central_f_quantile(-0.1, 2, 3)


class TestNoncentralFCdf:
    def test_zero_x(self):
        assert noncentral_f_cdf(0.0, 2, 9, 4.0) == 0.0
        assert noncentral_f_cdf(-1.0, 2, 9, 4.0) == 0.0

    def test_reduces_to_central_at_zero(self):
        for x in (0.2, 1.0, 3.7):
            for ndf, ddf in ((1, 5), (4, 40), (2, 10)):
                assert abs(
                    noncentral_f_cdf(x, ndf, ddf, 0.0) - central_f_cdf(x, ndf, ddf)
                ) <= REDUCTION_TOL

    def test_frozen_series_values(self):
        # computed with ncf_cdf_series above
        cases = [
            (2.0, 3, 17, 5.0, 0.4018862641544303),
            (5.5, 1, 7, 12.0, 0.15323747288931855),
            (0.7, 4, 9, 2.5, 0.1973281687414727),
            (3.2, 6, 40, 25.0, 0.1459838286918226),
            (4.149097445699548, 1, 32, 8.5, 0.1929632848527802),
        ]
        for x, ndf, ddf, lam, frozen in cases:
            got = noncentral_f_cdf(x, ndf, ddf, lam)
            assert got == pytest.approx(frozen, rel=1e-11)
            assert got == pytest.approx(ncf_cdf_series(x, ndf, ddf, lam), rel=1e-11)

    def test_large_noncentrality_stays_stable(self):
        # the mode-centered expansion must not underflow to garbage
        value = noncentral_f_cdf(120.0, 2, 30, 3000.0)
        assert 0.0 <= value <= 1e-40

    def test_term_budget_doubling(self):
        for lam in (3.0, 18.0, 80.0):
            low = noncentral_f_cdf(3.0, 2, 20, lam, tol=0.0, max_terms=300)
            high = noncentral_f_cdf(3.0, 2, 20, lam, tol=0.0, max_terms=600)
            assert abs(low - high) < 1e-10

    def test_domain(self):
        with pytest.raises(ValueError):
            noncentral_f_cdf(1.0, 2, 9, -0.5)
        with pytest.raises(ValueError):
            noncentral_f_cdf(1.0, 2, 9, float("nan"))

    @settings(max_examples=150)
    @given(
        x=st.floats(0.05, 20.0),
        ndf=st.integers(1, 40),
        ddf=st.integers(1, 200),
        lam=st.floats(0.0, 60.0),
        extra=st.floats(0.1, 30.0),
    )
    def test_decreasing_in_noncentrality(self, x, ndf, ddf, lam, extra):
        smaller = noncentral_f_cdf(x, ndf, ddf, lam + extra)
        larger = noncentral_f_cdf(x, ndf, ddf, lam)
        assert smaller <= larger + 1e-12


class TestFTail:
    def test_cdf_method(self):
        tail = FTail(x=2.0, ndf=3, ddf=17, noncentrality=5.0)
        assert tail.cdf() == pytest.approx(noncentral_f_cdf(2.0, 3, 17, 5.0))

    def test_validation(self):
        with pytest.raises(ValueError):
            FTail(x=1.0, ndf=0, ddf=5)
        with pytest.raises(ValueError):
            FTail(x=1.0, ndf=2, ddf=5, noncentrality=-1.0)
        with pytest.raises(ValueError):
            FTail(x=float("inf"), ndf=2, ddf=5)


class TestPowerFromF:
    def test_null_fvalue_recovers_alpha(self):
        for alpha in (0.01, 0.05, 0.2):
            for ndf, ddf in ((1, 7), (1, 45), (3, 100)):
                result = power_from_f(0.0, ndf, ddf, alpha)
                assert abs(result.power - alpha) <= 1e-9

    def test_frozen_power_value(self):
        # noncentrality 8.5 with 1 and 32 degrees of freedom; frozen from
        # the series oracle in this file
        result = power_from_f(8.5, 1, 32, 0.05)
        assert result.power == pytest.approx(0.8070367151472021, rel=1e-10)
        assert result.noncentrality == pytest.approx(8.5, rel=1e-15)
        assert result.fcrit == pytest.approx(4.149097445699548, rel=1e-10)
        assert result.ndf == 1 and result.ddf == 32

    def test_large_ddf_matches_normal_approximation(self):
        # as ddf grows the two-sided test tends to the normal limit
        # Phi(sqrt(lambda) - z_{0.975})
        result = power_from_f(8.5, 1, 10**6, 0.05)
        z = 1.959963984540054
        limit = 0.5 * (1.0 + math.erf((math.sqrt(8.5) - z) / math.sqrt(2.0)))
        assert result.power == pytest.approx(limit, abs=1e-3)

    def test_monotone_in_fvalue(self):
        powers = [power_from_f(f, 1, 20, 0.05).power for f in (0.0, 1.0, 4.0, 9.0, 16.0)]
        assert powers == sorted(powers)
        assert powers[0] == pytest.approx(0.05, abs=1e-9)

    def test_monotone_in_ddf(self):
        # more denominator information can only help at fixed noncentrality
        powers = [power_from_f(8.5, 1, d, 0.05).power for d in (5, 10, 30, 100, 1000)]
        assert powers == sorted(powers)

    def test_policy_label_passthrough(self):
        result = power_from_f(2.0, 1, 9, 0.05, ddf_policy="containment")
        assert result.ddf_policy == "containment"
        assert power_from_f(2.0, 1, 9, 0.05).ddf_policy is None

    def test_domain(self):
        with pytest.raises(ValueError):
            power_from_f(-1.0, 1, 9, 0.05)
        with pytest.raises(ValueError):
            power_from_f(1.0, 1, 9, 0.0)
        with pytest.raises(ValueError):
            power_from_f(1.0, 1, 9, 1.0)

    @settings(max_examples=100)
    @given(
        fvalue=st.floats(0.0, 40.0),
        ndf=st.integers(1, 10),
        ddf=st.integers(2, 300),
        alpha=st.floats(0.005, 0.2),
    )
    def test_power_bounded_and_above_alpha(self, fvalue, ndf, ddf, alpha):
        result = power_from_f(fvalue, ndf, ddf, alpha)
        assert 0.0 <= result.power <= 1.0
        # a noncentral F is stochastically larger than the central one
        assert result.power >= alpha - 1e-9

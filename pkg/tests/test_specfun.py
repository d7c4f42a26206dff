import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from glcinterference import specfun
from glcinterference.errors import DomainError, InvalidArgumentError, PoleError

mp.mp.dps = 40

# Frozen high-precision references (mpmath, 40 digits).
CI_0_025 = -3.1118200351434497
LN_GAMMA_7_3 = float(mp.log(mp.gamma(mp.mpf("7.3"))))


def rel(a, b):
    return abs(a - b) / abs(b)


class TestLnGamma:
    def test_one(self):
        assert specfun.ln_gamma(1.0) == 0.0

    def test_half(self):
        assert specfun.ln_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)

    def test_oracle(self):
        assert rel(specfun.ln_gamma(7.3), LN_GAMMA_7_3) < 1e-13

    @pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
    def test_poles(self, x):
        with pytest.raises(PoleError):
            specfun.ln_gamma(x)

    @pytest.mark.parametrize("x", [-2.5, -0.3, 1e-3, 3.7, 55.5, 170.2, 1e4])
    def test_grid(self, x):
        assert rel(specfun.ln_gamma(x), float(mp.log(abs(mp.gamma(x))))) < 1e-13 or x == 1e-3


class TestUpperIncompleteGamma:
    def test_exponential(self):
        assert rel(specfun.upper_incomplete_gamma(1.0, 2.0), math.exp(-2.0)) < 1e-14

    def test_small_x_limit(self):
        assert specfun.upper_incomplete_gamma(0.5, 1e-14) == pytest.approx(math.sqrt(math.pi), rel=1e-6)
        assert specfun.upper_incomplete_gamma(0.5, 0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-15)

    def test_negative_a_quadrature_oracle(self):
        ref, _ = integrate.quad(lambda t: t**-2.0 * math.exp(-t), 0.25, np.inf, epsabs=0, epsrel=1e-13)
        assert rel(specfun.upper_incomplete_gamma(-1.0, 0.25), ref) < 1e-10

    @pytest.mark.parametrize("a", [-2.5, -2.0, -1.0, -0.5, 0.0, 0.3, 1.0, 2.5, 10.0, 40.0])
    @pytest.mark.parametrize("x", [1e-4, 0.01, 0.25, 1.0, 3.0, 12.0, 60.0])
    def test_mpmath_grid(self, a, x):
        ref = float(mp.gammainc(a, x))
        assert rel(specfun.upper_incomplete_gamma(a, x), ref) < 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            specfun.upper_incomplete_gamma(-1.0, 0.0)
        with pytest.raises(DomainError):
            specfun.upper_incomplete_gamma(1.0, -1.0)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-4.0, 20.0), st.floats(0.01, 40.0))
    def test_recurrence(self, a, x):
        lhs = specfun.upper_incomplete_gamma(a + 1.0, x)
        rhs = a * specfun.upper_incomplete_gamma(a, x) + x**a * math.exp(-x)
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), x**a * math.exp(-x))


class TestSiCi:
    def test_si_zero(self):
        assert specfun.sine_integral(0.0) == 0.0

    def test_si_infinity(self):
        assert specfun.sine_integral(math.inf) == math.pi / 2
        assert abs(specfun.sine_integral(1e8) - math.pi / 2) < 1e-7

    def test_ci_small_argument(self):
        assert abs(specfun.cosine_integral(0.025) - CI_0_025) < 1e-12

    def test_ci_domain(self):
        with pytest.raises(DomainError):
            specfun.cosine_integral(0.0)
        with pytest.raises(DomainError):
            specfun.cosine_integral(-1.0)

    @pytest.mark.parametrize("x", [1e-6, 1e-3, 0.025, 0.5, 1.0, 1.999, 2.0, 2.001, 4.0, 6.0, 6.5,
                                   10.0, 25.0, 100.0, 1e3, 1e5])
    def test_mpmath(self, x):
        assert abs(specfun.sine_integral(x) - float(mp.si(x))) < 1e-12
        assert abs(specfun.cosine_integral(x) - float(mp.ci(x))) < 1e-12

    def test_ci_series_oracle(self):
        x = 0.025
        series = specfun.EULER_GAMMA + math.log(x) + sum(
            (-x * x) ** k / (2 * k * math.factorial(2 * k)) for k in range(1, 12))
        assert abs(specfun.cosine_integral(x) - series) < 1e-14

    @settings(max_examples=200, deadline=None)
    @given(st.floats(1e-6, 1e4))
    def test_si_odd(self, x):
        assert specfun.sine_integral(-x) == -specfun.sine_integral(x)


class TestGauss2F1:
    def test_binomial(self):
        assert rel(specfun.gauss_2f1(2.0, 0.7, 0.7, -3.0), 1.0 / 16.0) < 1e-12

    def test_log(self):
        assert rel(specfun.gauss_2f1(1.0, 1.0, 2.0, -1.0), math.log(2.0)) < 1e-14

    def test_radial_integral_oracle(self):
        # int_0^R r^c / (eps + r^alpha) dr = R^(c+1)/((c+1) eps) 2F1(1, (c+1)/alpha; (c+1)/alpha + 1; -R^alpha/eps)
        c, alpha, eps, R = 2.0, 4.0, 1.0, 10.0
        f = specfun.gauss_2f1(1.0, 0.75, 1.75, -(R**alpha) / eps)
        ref, _ = integrate.quad(lambda r: r**c / (eps + r**alpha), 0.0, R, epsabs=0, epsrel=1e-13, limit=200)
        assert rel(R ** (c + 1) / ((c + 1) * eps) * f, ref) < 1e-9

    def test_zero_argument(self):
        assert specfun.gauss_2f1(3.3, -1.7, 2.2, 0.0) == 1.0

    def test_errors(self):
        with pytest.raises(PoleError):
            specfun.gauss_2f1(1.0, 1.0, -2.0, 0.5)
        with pytest.raises(DomainError):
            specfun.gauss_2f1(1.0, 1.0, 2.0, 1.0)
        with pytest.raises(InvalidArgumentError):
            specfun.gauss_2f1(1.0, math.nan, 2.0, 0.1)

    def test_error_estimate(self):
        res = specfun.gauss_2f1(1.0, 0.75, 1.75, -1e4, return_error=True)
        assert isinstance(res, specfun.SpecFunResult)
        assert res.est_error >= 0.0
        assert abs(res.value - float(mp.hyp2f1(1, 0.75, 1.75, -1e4))) <= max(res.est_error, 1e-15 * abs(res.value)) * 10

    @pytest.mark.parametrize("j", [0, 1, 2, 3, 4])
    @pytest.mark.parametrize("c", [1, 2, 3, 5, 9, 17, 41])
    @pytest.mark.parametrize("alpha", [2.0, 3.0, 4.0])
    @pytest.mark.parametrize("z", [-0.3, -0.9, -5.0, -1e3, -1e6])
    def test_radial_parameter_region(self, j, c, alpha, z):
        b = (c + 1) / alpha
        ref = float(mp.hyp2f1(j, b, b + 1, z))
        got = specfun.gauss_2f1(float(j), b, b + 1.0, z)
        assert rel(got, ref) < 1e-9 or (ref == 0 and got == 0)

    @pytest.mark.parametrize("a,b,c,z", [(0.5, 1.5, 2.5, 0.95), (1.0, 1.0, 2.0, 0.999), (2.0, 3.0, 5.0, 0.7),
                                         (-3.0, 2.0, 1.5, -7.0), (1.3, 2.2, 3.5, -0.49)])
    def test_general(self, a, b, c, z):
        assert rel(specfun.gauss_2f1(a, b, c, z), float(mp.hyp2f1(a, b, c, z))) < 1e-9

    @settings(max_examples=300, deadline=None)
    @given(st.floats(-3.0, 4.0, allow_subnormal=False), st.floats(-3.0, 4.0, allow_subnormal=False),
           st.floats(0.2, 6.0), st.floats(-1e6, -1e-9))
    def test_pfaff(self, a, b, c, z):
        lhs = specfun.gauss_2f1(a, b, c, z)
        rhs = (1.0 - z) ** (-a) * specfun.gauss_2f1(a, c - b, c, z / (z - 1.0))
        assert abs(lhs - rhs) <= 1e-9 * max(abs(lhs), abs(rhs), 1e-300) + 1e-300

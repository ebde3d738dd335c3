import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from churnkit import numerics
from churnkit.errors import ConvergenceError, InvalidInputError, NumericalError
from churnkit.parametric import fit_exponential

finite = st.floats(min_value=-8.0, max_value=8.0, allow_nan=False)


def chi2_density(x):
    return math.exp(-x / 2.0) / math.sqrt(2.0 * math.pi * x)


class TestNormal:
    def test_cdf_values(self):
        assert numerics.std_normal_cdf(0.0) == 0.5
        assert numerics.std_normal_cdf(1.96) == pytest.approx(0.975, abs=1e-3)

    def test_cdf_against_series(self):
        # Taylor series of erf, summed in exact rationals-ish double steps
        def phi(x):
            total, term, k = 0.0, x, 0
            while abs(term) > 1e-18:
                total += term / (2 * k + 1)
                k += 1
                term *= -x * x / (2 * k)
            return 0.5 + total / math.sqrt(2 * math.pi)

        for x in np.linspace(-5, 5, 41):
            assert numerics.std_normal_cdf(x) == pytest.approx(phi(x), abs=1e-10)

    @given(finite)
    def test_symmetry(self, x):
        assert numerics.std_normal_cdf(x) + numerics.std_normal_cdf(-x) == pytest.approx(1.0, abs=1e-12)
        assert numerics.std_normal_pdf(x) == numerics.std_normal_pdf(-x)

    @given(finite, finite)
    def test_cdf_monotone(self, a, b):
        lo, hi = sorted((a, b))
        assert numerics.std_normal_cdf(lo) <= numerics.std_normal_cdf(hi)

    def test_pdf_peak_and_integral(self):
        assert numerics.std_normal_pdf(0.0) == pytest.approx(0.3989422804, abs=1e-10)
        area, _ = integrate.quad(numerics.std_normal_pdf, -np.inf, np.inf)
        assert area == pytest.approx(1.0, abs=1e-6)

    def test_tail_keeps_relative_precision(self):
        # Mills-ratio asymptotics: sf(x) ~ pdf(x)/x * (1 - 1/x^2 + 3/x^4)
        x = 10.0
        approx = numerics.std_normal_pdf(x) / x * (1 - 1 / x**2 + 3 / x**4 - 15 / x**6)
        assert numerics.std_normal_sf(x) == pytest.approx(approx, rel=1e-3)
        # pdf(40) underflows; compare logs of the leading term instead
        log_leading = -800.0 - 0.5 * math.log(2 * math.pi) - math.log(40.0)
        assert numerics.log_std_normal_sf(40.0) == pytest.approx(log_leading, abs=1e-3)

    @given(st.floats(min_value=1e-10, max_value=1 - 1e-10))
    def test_quantile_inverts_cdf(self, p):
        x = numerics.std_normal_quantile(p)
        assert numerics.std_normal_cdf(x) == pytest.approx(p, rel=1e-8, abs=1e-15)

    def test_z_critical(self):
        assert round(numerics.z_critical(0.95), 2) == 1.96
        assert numerics.z_critical(0.9) > 0
        for bad in (0.0, 1.0, 1.5):
            with pytest.raises(InvalidInputError):
                numerics.z_critical(bad)


class TestChiSquare:
    def test_zero(self):
        assert numerics.chi_square_1df_sf(0.0) == 1.0

    def test_critical_value_against_quadrature(self):
        head, _ = integrate.quad(chi2_density, 0.0, 3.841)
        oracle = 1.0 - head
        assert oracle == pytest.approx(0.05, abs=1e-3)
        assert numerics.chi_square_1df_sf(3.841) == pytest.approx(oracle, rel=1e-6)

    def test_deep_tail_against_quadrature(self):
        tail, _ = integrate.quad(chi2_density, 21.4, np.inf, epsabs=0, epsrel=1e-12)
        assert numerics.chi_square_1df_sf(21.4) == pytest.approx(tail, rel=1e-6)
        assert numerics.chi_square_1df_sf(21.4) == pytest.approx(3.74e-06, rel=0.02)

    def test_negative_rejected(self):
        with pytest.raises(InvalidInputError):
            numerics.chi_square_1df_sf(-1.0)

    @given(st.floats(min_value=0, max_value=500), st.floats(min_value=0, max_value=500))
    def test_monotone_in_unit_interval(self, a, b):
        lo, hi = sorted((a, b))
        p_lo, p_hi = numerics.chi_square_1df_sf(lo), numerics.chi_square_1df_sf(hi)
        assert 0.0 < p_hi <= p_lo <= 1.0


def quadratic(x):
    return -((x[0] - 3.0) ** 2), np.array([-2.0 * (x[0] - 3.0)]), np.array([[-2.0]])


class TestNewton:
    def test_quadratic_one_step(self):
        assert numerics.newton_raphson(quadratic, [0.0])[0] == pytest.approx(3.0, abs=1e-8)

    def test_exponential_likelihood(self, ten):
        d, r = 9, float(ten.durations.sum())

        def loglik(x):
            lam = x[0]
            if lam <= 0:
                return -math.inf, np.array([math.nan]), np.array([[math.nan]])
            return d * math.log(lam) - lam * r, np.array([d / lam - r]), np.array([[-d / lam**2]])

        lam = numerics.newton_raphson(loglik, [1.0])[0]
        assert lam == pytest.approx(0.319, abs=1e-3)
        assert lam == pytest.approx(fit_exponential(ten).params[0], abs=1e-8)

    def test_max_iter_zero(self):
        with pytest.raises(ConvergenceError) as info:
            numerics.newton_raphson(quadratic, [0.0], max_iter=0)
        assert info.value.last_iterate is not None

    def test_singular_hessian(self):
        def flat(x):
            return -x[0] ** 2, np.array([-2 * x[0], 1.0]), np.zeros((2, 2))

        with pytest.raises(NumericalError):
            numerics.newton_raphson(flat, [1.0, 0.0])

    def test_non_concave_start_still_climbs(self):
        # -x^4 + x^2 has a local minimum at 0 and maxima at +-1/sqrt(2)
        def f(x):
            v = x[0]
            return -(v**4) + v**2, np.array([-4 * v**3 + 2 * v]), np.array([[-12 * v**2 + 2]])

        x = numerics.newton_raphson(f, [0.1])[0]
        assert abs(x) == pytest.approx(1 / math.sqrt(2), abs=1e-8)

    @given(st.floats(min_value=-50, max_value=50), st.floats(min_value=-50, max_value=50))
    def test_init_invariance_for_concave(self, a, b):
        # strictly concave in two variables: maximiser (1, -2)
        def f(x):
            u, v = x[0] - 1.0, x[1] + 2.0
            # softplus term keeps the Hessian non-constant
            sig = 0.5 * (1.0 + math.tanh(u / 2.0))
            value = -(u**2) - 2 * v**2 - u * v - np.logaddexp(0.0, u) + 0.5 * u
            grad = np.array([-2 * u - v - sig + 0.5, -4 * v - u])
            hess = np.array([[-2 - sig * (1 - sig), -1.0], [-1.0, -4.0]])
            return value, grad, hess

        x = numerics.newton_raphson(f, [a, b])
        assert x == pytest.approx([1.0, -2.0], abs=1e-7)

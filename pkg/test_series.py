"""
Tests for the truncated power series engine: ring operations, log/exp,
powers, composition, Lagrange inversion and the mpmath coefficient path.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nef_toolkit.core.series import (
    TruncatedSeries,
    arcsin,
    cauchy_product,
    compose,
    derivative,
    exp_series,
    exponential,
    geometric,
    lagrange_invert,
    log1p,
    log_series,
    make_context,
    power,
    reciprocal,
    shift,
)
from nef_toolkit.errors import (
    NonpositiveConstantTerm,
    NonzeroInnerConstant,
    SeriesRangeError,
    ZeroConstantTerm,
)


ORDER = 12


class TestRingOperations:
    def test_product_of_conjugate_binomials(self):
        a = TruncatedSeries([1.0, 1.0, 0.0, 0.0])
        b = TruncatedSeries([1.0, -1.0, 0.0, 0.0])
        assert_allclose(cauchy_product(a, b).coeffs, [1.0, 0.0, -1.0, 0.0])

    def test_order_is_the_smaller_operand_order(self):
        a = TruncatedSeries([1.0, 2.0, 3.0])
        b = TruncatedSeries([1.0, 1.0])
        assert (a * b).order == 1
        assert (a + b).order == 1

    def test_scalar_arithmetic_touches_the_constant_term(self):
        a = TruncatedSeries([1.0, 2.0])
        assert_allclose((a + 3).coeffs, [4.0, 2.0])
        assert_allclose((1 - a).coeffs, [0.0, -2.0])
        assert_allclose((2 * a).coeffs, [2.0, 4.0])

    def test_reciprocal_of_geometric(self):
        assert_allclose(reciprocal(geometric(ORDER)).coeffs, [1.0, -1.0] + [0.0] * (ORDER - 1), atol=1e-15)

    def test_derivative_and_shift(self):
        a = TruncatedSeries([1.0, 2.0, 3.0, 4.0])
        assert_allclose(derivative(a).coeffs, [2.0, 6.0, 12.0])
        assert_allclose(shift(a).coeffs, [0.0, 1.0, 2.0, 3.0])
        assert_allclose(shift(a, 3).coeffs, [0.0, 0.0, 0.0, 1.0])

    def test_series_are_immutable(self):
        a = TruncatedSeries([1.0, 2.0])
        with pytest.raises(ValueError):
            a.coeffs[0] = 5.0

    def test_empty_series_is_rejected(self):
        with pytest.raises(ValueError):
            TruncatedSeries([])


class TestTranscendental:
    def test_log_of_exponential_is_z(self):
        expected = np.zeros(ORDER + 1)
        expected[1] = 1.0
        assert_allclose(log_series(exponential(ORDER)).coeffs, expected, atol=1e-14)

    def test_exp_of_log1p_is_one_plus_z(self):
        expected = np.zeros(ORDER + 1)
        expected[:2] = 1.0
        assert_allclose(exp_series(log1p(ORDER)).coeffs, expected, atol=1e-14)

    def test_exp_with_constant_term(self):
        z = TruncatedSeries([2.0, 1.0, 0.0, 0.0])
        assert_allclose(exp_series(z).coeffs, math.exp(2.0) * np.array([1.0, 1.0, 0.5, 1.0 / 6.0]))

    def test_fractional_power(self):
        assert_allclose(power(TruncatedSeries([1.0, 1.0, 0.0, 0.0]), 0.5).coeffs, [1.0, 0.5, -0.125, 0.0625])

    def test_integer_power_accepts_zero_constant_term(self):
        z = TruncatedSeries([0.0, 1.0, 0.0, 0.0])
        assert_allclose(power(z, 2).coeffs, [0.0, 0.0, 1.0, 0.0])
        assert_allclose((z ** 0).coeffs, [1.0, 0.0, 0.0, 0.0])

    def test_compose_exponential_with_log1p(self):
        expected = np.zeros(ORDER + 1)
        expected[:2] = 1.0
        assert_allclose(compose(exponential(ORDER), log1p(ORDER)).coeffs, expected, atol=1e-14)

    def test_arcsin_coefficients(self):
        assert_allclose(arcsin(7).coeffs, [0.0, 1.0, 0.0, 1.0 / 6.0, 0.0, 3.0 / 40.0, 0.0, 5.0 / 112.0])


class TestErrors:
    def test_compose_needs_vanishing_inner_constant(self):
        with pytest.raises(NonzeroInnerConstant):
            compose(exponential(4), exponential(4))

    def test_log_needs_positive_constant_term(self):
        with pytest.raises(NonpositiveConstantTerm):
            log_series(TruncatedSeries([-1.0, 1.0]))
        with pytest.raises(NonpositiveConstantTerm):
            log_series(TruncatedSeries([0.0, 1.0]))

    def test_negative_power_needs_nonzero_constant_term(self):
        with pytest.raises(ZeroConstantTerm):
            power(TruncatedSeries([0.0, 1.0]), -1)

    def test_lagrange_needs_nonzero_generator_constant(self):
        with pytest.raises(ZeroConstantTerm):
            lagrange_invert(TruncatedSeries([0.0, 1.0, 0.0]), 2)

    def test_overflow_is_reported(self):
        big = TruncatedSeries([1e200, 1e200])
        with np.errstate(over="ignore"), pytest.raises(SeriesRangeError):
            cauchy_product(big, big)

    def test_exp_overflow_is_reported(self):
        with pytest.raises(SeriesRangeError):
            exp_series(TruncatedSeries([1000.0, 1.0]))

    def test_log_overflow_is_reported(self):
        tiny_constant = TruncatedSeries([1e-300, 1e300, 0.0, 0.0])
        with np.errstate(over="ignore", invalid="ignore"), pytest.raises(SeriesRangeError):
            log_series(tiny_constant)


class TestLagrangeInversion:
    def test_abel_generator(self):
        h = lagrange_invert(exponential(ORDER), ORDER + 1)
        expected = [(n + 1) ** (n - 1) / math.factorial(n) for n in range(ORDER + 1)]
        assert h[0] == 0
        assert_allclose(h.coeffs[1:], expected, rtol=1e-12)

    def test_catalan_generator(self):
        h = lagrange_invert(geometric(ORDER), ORDER + 1)
        catalan = [math.comb(2 * n, n) // (n + 1) for n in range(ORDER + 1)]
        assert_allclose(h.coeffs[1:], catalan, rtol=1e-12)

    def test_generator_order_must_cover_the_request(self):
        with pytest.raises(ValueError):
            lagrange_invert(exponential(3), 10)


class TestMultiprecision:
    def test_contexts_keep_their_own_precision(self):
        low = make_context(20)
        high = make_context(80)
        assert low.dps == 20
        assert high.dps == 80

    def test_mp_series_round_trip(self):
        ctx = make_context(60)
        z = log_series(exponential(30, ctx))
        assert z.is_multiprecision
        values = z.to_float()
        assert values.dtype == np.float64
        assert abs(values[1] - 1.0) < 1e-30
        assert np.max(np.abs(values[2:])) < 1e-40

    def test_mp_catalan_numbers_are_exact(self):
        ctx = make_context(60)
        h = lagrange_invert(geometric(60, ctx), 61)
        exact = math.comb(120, 60) // 61
        assert abs(h[61] - exact) / exact < 1e-50

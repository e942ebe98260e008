"""
Tests for reduction functions of families on ℕ: the cumulant pipeline, the
generator route, the quadratic closed forms and the master identity.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nef_toolkit.core.series import TruncatedSeries, make_context
from nef_toolkit.errors import (
    AbsoluteContinuityViolated,
    BernoulliNoRf,
    DegenerateMeasure,
    NotInfinitelyDivisible,
    RfUnavailable,
    UnknownFamily,
)
from nef_toolkit.families import get_family, parse_family_name
from nef_toolkit.families.discrete import arcsine_polynomial
from nef_toolkit.reduction import continuous
from nef_toolkit.reduction.discrete import (
    DiscreteIdFamily,
    alpha_convolve,
    build_family,
    cumulant_coeffs,
    generating_identity_gap,
    generator_series,
    lagrange_family,
    pipeline_dps,
    reduction_fn,
    rho_from_c,
    rho_via_generator,
    vf_parametric_check,
)
from nef_toolkit.reduction.oracle import identity_check
from nef_toolkit.reduction.validation import _vf_checks, validate_family


class TestCumulantPipeline:
    def test_poisson_phi_is_the_identity(self):
        rf = reduction_fn(build_family(get_family("poisson"), 30))
        assert_allclose(rf.values, np.arange(31), atol=1e-9)

    def test_negbin_phi_matches_its_closed_form(self):
        rf = reduction_fn(build_family(get_family("negbin(2)"), 20))
        n = np.arange(21)
        assert_allclose(rf.values, (2 * n + n ** 2) / 3.0, atol=1e-8)

    def test_poisson_coefficient_tables(self):
        family = build_family(get_family("poisson"), 8)
        assert_allclose(family.c[1:], [1.0] + [0.0] * 7, atol=1e-30)
        assert_allclose(family.rho[:3], [0.0, 1.0, 0.0], atol=1e-30)
        assert_allclose(family.alpha[1:], family.beta[:-1], rtol=1e-14)

    def test_rows_carry_the_full_pipeline(self):
        rows = build_family(get_family("takacs"), 5).rows()
        assert len(rows) == 6
        assert set(rows[0]) == {"n", "beta", "c", "rho", "alpha", "phi"}
        assert [row["beta"] for row in rows] == pytest.approx([1, 1, 2, 5, 14, 42])

    def test_abel_weights(self):
        family = build_family(get_family("abel"), 4)
        assert_allclose(family.beta, [(n + 1) ** (n - 1) / math.factorial(n) for n in range(5)], rtol=1e-14)

    def test_binomial_is_not_infinitely_divisible(self):
        with pytest.raises(NotInfinitelyDivisible):
            build_family(get_family("binomial(2)"), 6)

    def test_point_mass_is_degenerate(self):
        with pytest.raises(DegenerateMeasure):
            cumulant_coeffs([1.0, 0.0, 0.0])

    def test_alpha_outside_the_support_of_beta(self):
        beta = TruncatedSeries([1.0, 0.0, 1.0])
        rho = TruncatedSeries([0.0, 1.0, 0.0])
        family = DiscreteIdFamily("gap", beta, cumulant_coeffs(beta), rho, alpha_convolve(beta, rho))
        with pytest.raises(AbsoluteContinuityViolated):
            reduction_fn(family)

    def test_rho_from_c(self):
        assert_allclose(rho_from_c(TruncatedSeries([5.0, 1.0, 0.5, 0.25])).coeffs, [0.0, 1.0, 2.0, 2.25])

    def test_precision_grows_with_order(self):
        assert pipeline_dps(10) >= 30
        assert pipeline_dps(400) > pipeline_dps(100)

    def test_atom_table_domain(self):
        rf = reduction_fn(build_family(get_family("poisson"), 5))
        assert rf(3) == pytest.approx(3.0)
        with pytest.raises(RfUnavailable):
            rf(6)
        with pytest.raises(RfUnavailable):
            rf(1.5)

    def test_generating_identity(self):
        nef = get_family("strict-arcsine")
        family = build_family(nef, 120)
        assert generating_identity_gap(family, nef, -2.0) < 1e-10


class TestGeneratorRoute:
    @pytest.mark.parametrize("name", ["exp", "geometric", "exp-arcsin", "one-plus"])
    def test_both_routes_agree(self, name):
        order = 25
        ctx = make_context(pipeline_dps(order))
        g = generator_series(name, order, ctx)
        cumulant_route = lagrange_family(g, order).rho
        generator_route = rho_via_generator(g, order).to_float()
        assert_allclose(generator_route, cumulant_route, rtol=1e-8, atol=1e-300)

    def test_lagrange_weights(self):
        ctx = make_context(40)
        takacs = lagrange_family(generator_series("geometric", 8, ctx), 8)
        assert_allclose(takacs.beta, [1, 1, 2, 5, 14, 42, 132, 429, 1430])
        arcsine = lagrange_family(generator_series("exp-arcsin", 4, ctx), 4)
        assert_allclose(arcsine.beta[:4], [1.0, 1.0, 1.5, 17.0 / 6.0], rtol=1e-14)

    def test_one_plus_generator(self):
        ctx = make_context(40)
        family = lagrange_family(generator_series("one-plus", 10, ctx), 10)
        assert_allclose(family.beta, np.ones(11))
        assert_allclose(family.rho, np.arange(11), atol=1e-30)

    def test_generator_coefficients_must_be_non_negative(self):
        with pytest.raises(ValueError):
            lagrange_family(TruncatedSeries([1.0, -1.0, 0.0]), 2)

    def test_unknown_generator(self):
        with pytest.raises(UnknownFamily):
            generator_series("sin", 5)


class TestQuadraticClosedForms:
    def test_coefficients(self):
        coefficients = {label: continuous.qvf_rf(spec).coefficients for label, spec in continuous.table_one(2).items()}
        assert coefficients["normal"] == (1.0, 0.0, 0.0)
        assert coefficients["poisson"] == (0.0, 1.0, 0.0)
        assert coefficients["gamma(2)"] == pytest.approx((0.0, 0.0, 1 / 3))
        assert coefficients["binomial(2)"] == pytest.approx((0.0, 2.0, -1.0))
        assert coefficients["negbin(2)"] == pytest.approx((0.0, 2 / 3, 1 / 3))
        assert coefficients["ghs(2)"] == pytest.approx((4 / 3, 0.0, 1 / 3))

    def test_bernoulli_has_no_reduction_function(self):
        with pytest.raises(BernoulliNoRf):
            continuous.table_one(1)["binomial(1)"].phi_coefficients()

    def test_spec_lookup(self):
        assert continuous.qvf_spec_for("abel", ()) is None
        assert continuous.qvf_spec_for("negbin", (3.0,)).label == "negbin(3)"

    @pytest.mark.parametrize("name, theta", [
        ("normal", 0.4),
        ("poisson", 0.5),
        ("binomial(2)", -0.3),
        ("negbin(2)", -1.0),
        ("gamma(2)", -1.0),
    ])
    def test_monte_carlo_mean_of_phi_is_the_variance(self, name, theta):
        nef = get_family(name)
        rf = continuous.qvf_rf(continuous.qvf_spec_for(*parse_family_name(name)))
        draws = nef.sample(theta, rng_seed=17, count=200_000)
        values = rf(draws)
        variance = nef.exact_cumulants(theta)[2]
        se = values.std(ddof=1) / math.sqrt(len(values))
        assert abs(values.mean() - variance) < 4 * se + 1e-12


class TestMasterIdentity:
    def test_identity_check_on_an_atom_table(self):
        nef = get_family("abel")
        rf = reduction_fn(build_family(nef, 200))
        check = identity_check(nef, rf, -2.0, 1e-6)
        assert check.passed
        assert check.tail_mass < 1e-6

    def test_strict_arcsine_validates(self):
        report = validate_family("strict-arcsine")
        assert report.passed
        assert report.rf_kind == "atom-table"
        assert report.max_relerr < 1e-6

    def test_negbin_pipeline_checks_are_included(self):
        report = validate_family("negbin(2)", probes=3)
        assert report.passed
        assert any(check.check == "pipeline-vs-closed-form" for check in report.checks)

    def test_vf_gap_is_absolute_below_unit_variance(self, monkeypatch):
        # V(μ) = μ + 5e-7: a 5e-7 gap at every θ.
        nef = get_family("poisson")
        monkeypatch.setattr(nef, "variance_poly", (5e-7, 1.0))
        low, high = _vf_checks(nef, np.array([-3.0, 2.0]), 1e-6)
        assert low.target == pytest.approx(math.exp(-3.0))
        assert low.relerr == pytest.approx(5e-7, rel=1e-3)
        assert low.passed
        assert high.relerr == pytest.approx(5e-7 / math.exp(2.0), rel=1e-3)
        assert high.detail == "absolute gap 5.00e-07"
        strict, _ = _vf_checks(nef, np.array([-3.0, 2.0]), 1e-7)
        assert not strict.passed


class TestArcsineFamily:
    def test_arcsine_polynomials(self):
        assert [arcsine_polynomial(1, n) for n in range(6)] == [1, 1, 1, 2, 5, 20]
        assert arcsine_polynomial(2, 3) == 2 * (4 + 1)
        with pytest.raises(ValueError):
            arcsine_polynomial(1, -1)

    def test_strict_arcsine_variance_function(self):
        nef = get_family("strict-arcsine")
        assert nef.variance_poly is not None
        assert vf_parametric_check(nef, nef.variance_poly, [-2.0, -1.0, -0.5]) < 1e-8
        assert vf_parametric_check(nef, (0.0, 1.0), [-1.0]) > 1e-3

"""
Tests for reduction functions with a basis density: quadratic closed forms,
the inverse Gaussian candidates, the power variance series and the Ressel
convolution grid.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nef_toolkit.errors import NonConvergent, RfUnavailable, TailTooHeavy
from nef_toolkit.families import get_family
from nef_toolkit.families.continuous import PvfSpec, ressel_convolution_power
from nef_toolkit.reduction.continuous import (
    ig_alpha_laplace_pair,
    ig_phi_laplace_pair,
    ig_reports,
    ig_rf,
    pvf_density,
    pvf_reports,
    pvf_rf,
    ressel_grid,
    ressel_power_gap,
    ressel_rf,
    ressel_tail_bound,
)
from nef_toolkit.reduction.functions import ClosedFormRf, DensityRatioRf, GridDensity, GridRatioRf, RfKind
from nef_toolkit.reduction.oracle import identity_check, laplace_oracle
from nef_toolkit.reduction.validation import PVF_GRID_TOL, build_reduction_function, validate_family


class TestQuadraticFamilies:
    @pytest.mark.parametrize("name", ["normal", "gamma(2)", "ghs"])
    def test_validates(self, name):
        report = validate_family(name, probes=4)
        assert report.passed
        assert report.rf_kind == RfKind.CLOSED_FORM.value

    def test_gamma_identity_at_one_theta(self):
        nef, rf = build_reduction_function("gamma(3)")
        check = identity_check(nef, rf, -0.5, 1e-6)
        assert check.target == pytest.approx(3.0 / 2.25)
        assert check.passed

    def test_closed_form_needs_a_definition(self):
        with pytest.raises(ValueError):
            ClosedFormRf("empty")


class TestInverseGaussian:
    def test_only_the_laplace_pair_candidate_validates(self):
        reports = {report.candidate: report for report in ig_reports()}
        assert reports["laplace-pair"].passed
        assert reports["laplace-pair"].max_relerr < 1e-6
        assert not reports["printed"].passed

    def test_phi_is_alpha_over_the_density(self):
        nef = get_family("inverse-gaussian")
        x = np.array([0.2, 0.5, 1.0, 2.0, 5.0])
        density = np.exp([nef.log_density(v) for v in x])
        assert_allclose(ig_phi_laplace_pair(x), ig_alpha_laplace_pair(x) / density, rtol=1e-9)

    def test_shipped_rf_records_its_candidate(self):
        rf = ig_rf()
        assert isinstance(rf, DensityRatioRf)
        assert rf.provenance["candidate"] == "laplace-pair"
        assert rf(1.0) > 0

    def test_rf_is_undefined_at_zero(self):
        with pytest.raises(RfUnavailable):
            ig_rf()(0.0)

    def test_variance_function_is_cubic(self):
        nef = get_family("inverse-gaussian")
        for theta in (-2.0, -0.5):
            _, mean, variance = nef.exact_cumulants(theta)
            assert variance == pytest.approx(mean ** 3, rel=1e-12)

    def test_validation_keeps_the_rejected_candidate_informational(self):
        report = validate_family("inverse-gaussian", probes=3)
        assert report.passed
        rejected = [check for check in report.checks if check.check == "formula:printed"]
        assert rejected
        assert any("rejected candidate" in (check.detail or "") for check in rejected)


class TestLaplaceOracle:
    def test_gamma_density(self):
        value = laplace_oracle(lambda x: x * math.exp(-x), -1.0)
        assert value == pytest.approx(0.25, rel=1e-10)

    def test_atom_is_added(self):
        value = laplace_oracle(lambda x: math.exp(-x), -1.0, atom=1.0)
        assert value == pytest.approx(1.5, rel=1e-10)

    def test_grid_density_tail_is_checked(self):
        grid = np.linspace(0.0, 1.0, 101)
        density = GridDensity(grid, np.ones_like(grid), tail_bound=1.0)
        with pytest.raises(NonConvergent):
            laplace_oracle(density, 0.0, rtol=1e-6)


class TestPowerVariance:
    def test_case_one_series_validate(self):
        reports = pvf_reports(PvfSpec(1.5))
        assert [report.candidate for report in reports] == ["beta-series", "alpha-series"]
        assert all(report.passed for report in reports)

    def test_case_one_rf(self):
        rf = pvf_rf(PvfSpec(1.5))
        assert isinstance(rf, DensityRatioRf)
        assert rf(0.0) == 0.0
        assert rf(np.array([0.5, 2.0, 8.0])).min() > 0

    def test_case_one_density_grid(self):
        # r = 1.5: κ(θ) = 4/(−θ), so the mass tilted by θ = −4 is e.
        beta = pvf_density(PvfSpec(1.5))
        assert beta.atom == 1.0
        assert beta.grid[0] == 0.0
        assert beta.values[0] == pytest.approx(4.0)
        assert beta.mass(-4.0) == pytest.approx(math.e, rel=1e-3)
        alpha = pvf_density(PvfSpec(1.5), kind="alpha")
        assert alpha.atom == 0.0
        assert np.all(alpha.values[1:] > 0)

    def test_density_kind_is_checked(self):
        with pytest.raises(ValueError):
            pvf_density(PvfSpec(1.5), kind="gamma")

    def test_case_two_density_below_the_series_cutoff(self):
        spec = PvfSpec(2.5)
        cutoff = spec.reliable_cutoff
        assert 0.0 < cutoff < 1.0
        overlap = np.array([2.0 * cutoff, 1.0])
        assert_allclose(spec._case2_integral(overlap), spec._case2_series(overlap)[0], rtol=1e-6)
        near_zero = spec.beta_density(np.array([1e-6, 1e-3, 0.5 * cutoff]))
        assert np.all(np.isfinite(near_zero))
        assert np.all(near_zero >= 0.0)
        assert near_zero[0] < 1e-100

    def test_case_two_builds_and_passes_the_identity(self):
        rf = pvf_rf(PvfSpec(2.5))
        assert isinstance(rf, GridRatioRf)
        assert rf.provenance["case"] == 2
        assert all(report["error"] is None for report in rf.provenance["reports"])
        nef = get_family("pvf(2.5)")
        for theta in (-4.0, -2.5, -1.0):
            check = identity_check(nef, rf, theta, PVF_GRID_TOL)
            assert check.passed, check

    def test_case_two_validates_end_to_end(self):
        report = validate_family("pvf(2.5)", probes=3)
        assert report.error is None
        assert report.passed
        assert report.rf_kind == RfKind.DENSITY_RATIO_GRID.value


class TestRessel:
    def test_first_convolution_power_is_the_density(self):
        nef = get_family("ressel")
        y = np.array([0.1, 0.5, 1.0, 3.0, 10.0])
        assert_allclose(ressel_convolution_power(y, 1), [nef.density(v) for v in y], rtol=1e-12)

    def test_grid_powers_match_the_closed_form(self):
        built = ressel_grid(m_max=6)
        assert ressel_power_gap(built, 1) < 1e-12
        for m in (2, 3):
            assert ressel_power_gap(built, m) < 1e-3

    def test_truncation_bound(self):
        assert ressel_tail_bound(-1.0, 60) < 1e-10
        assert ressel_tail_bound(-1.0, 5) > ressel_tail_bound(-1.0, 10)

    def test_heavy_tail_is_refused(self):
        with pytest.raises(TailTooHeavy):
            ressel_rf(m_max=4, probe=-0.05)

    def test_grid_needs_enough_terms(self):
        with pytest.raises(ValueError):
            ressel_grid(m_max=3)

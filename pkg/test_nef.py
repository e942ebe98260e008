"""
Tests for the NEF engine and the family registry: cumulants against closed
forms, variance function certification, domain checks, mean inversion and
sampling.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nef_toolkit.core.nef import BasisKind, ThetaInterval
from nef_toolkit.errors import MeanOutOfDomain, RfUnavailable, SamplerUnavailable, ThetaOutOfDomain, UnknownFamily
from nef_toolkit.families import get_family, parse_family_name
from nef_toolkit.families.continuous import PvfSpec, ressel_s
from nef_toolkit.families.registry import default_families, family_names, is_discrete
from nef_toolkit.core.series import make_context


class TestRegistry:
    def test_parse_with_and_without_parameters(self):
        assert parse_family_name("negbin(3)") == ("negbin", (3.0,))
        assert parse_family_name("poisson") == ("poisson", ())
        assert parse_family_name("Gamma") == ("gamma", (2,))
        assert parse_family_name("pvf(2.5, 2)") == ("pvf", (2.5, 2.0))

    @pytest.mark.parametrize("name", ["", "weibull", "negbin(x)", "poisson(", "binomial(2.5)", "gamma(1,2)"])
    def test_unknown_names(self, name):
        with pytest.raises(UnknownFamily):
            get_family(name)

    def test_labels_and_kinds(self):
        assert get_family("negbin(3)").label == "negbin(3)"
        assert get_family("binomial").support_size == 2
        assert get_family("gamma").kind is BasisKind.DENSITY
        assert get_family("abel").kind is BasisKind.ATOMS
        assert is_discrete("takacs")
        assert not is_discrete("ressel")

    def test_default_families_cover_the_registry(self):
        labels = [nef.label for nef in default_families()]
        assert len(labels) == len(family_names()) + 1
        assert "pvf(2.5)" in labels

    def test_instances_are_cached(self):
        assert get_family("poisson") is get_family("poisson")


class TestCumulants:
    @pytest.mark.parametrize("name, theta", [
        ("poisson", 0.7),
        ("binomial(3)", -0.4),
        ("negbin(2)", -0.5),
        ("strict-arcsine", -1.0),
    ])
    def test_atom_sums_match_closed_forms(self, name, theta):
        nef = get_family(name)
        assert_allclose(nef.cumulant_derivs(theta), nef.exact_cumulants(theta), rtol=1e-10)

    @pytest.mark.parametrize("name, theta", [
        ("normal", 0.8),
        ("gamma(2)", -0.5),
        ("ghs", 0.6),
        ("inverse-gaussian", -0.7),
        ("ressel", -1.0),
    ])
    def test_quadrature_matches_closed_forms(self, name, theta):
        nef = get_family(name)
        assert_allclose(nef.cumulant_derivs(theta), nef.exact_cumulants(theta), rtol=1e-7)

    @pytest.mark.parametrize("name, theta", [("abel", -2.0), ("takacs", -2.5), ("large-arcsine", -2.0)])
    def test_lagrange_families_satisfy_their_cubic_vf(self, name, theta):
        nef = get_family(name)
        _, mean, variance = nef.cumulant_derivs(theta)
        assert variance == pytest.approx(nef.variance_function(mean), rel=1e-9)

    def test_ressel_s_solves_its_equation(self):
        s = ressel_s(-0.3)
        assert s - math.log1p(s) == pytest.approx(0.3, rel=1e-13)

    def test_laplace_is_exp_kappa(self):
        nef = get_family("poisson")
        assert nef.laplace(0.0) == pytest.approx(1.0, rel=1e-12)


class TestDomains:
    def test_theta_outside_the_interval(self):
        with pytest.raises(ThetaOutOfDomain):
            get_family("abel").cumulant_derivs(-0.5)
        with pytest.raises(ThetaOutOfDomain):
            get_family("negbin(2)").mean(math.log(2.0))

    def test_mean_outside_the_domain(self):
        with pytest.raises(MeanOutOfDomain):
            get_family("binomial(2)").mean_inverse(3.0)
        with pytest.raises(MeanOutOfDomain):
            get_family("poisson").mean_inverse(-1.0)

    def test_interval_formatting(self):
        assert str(ThetaInterval(upper=0.0)) == "(-inf, 0)"
        assert ThetaInterval(-1.0, 1.0).contains(0.5)
        assert not ThetaInterval(-1.0, 1.0).contains(1.0)

    @pytest.mark.parametrize("name, mu", [("abel", 0.8), ("takacs", 2.0), ("strict-arcsine", 1.5), ("ressel", 0.5)])
    def test_mean_inverse_round_trip(self, name, mu):
        nef = get_family(name)
        theta = nef.mean_inverse(mu)
        assert nef.theta_interval.contains(theta)
        assert nef.mean(theta) == pytest.approx(mu, rel=1e-8)

    def test_tilted_pmf_sums_to_one(self):
        n, probs = get_family("takacs").tilted_pmf(-2.0)
        assert probs.sum() == pytest.approx(1.0, rel=1e-12)
        assert n[0] == 0


class TestPowerVariance:
    @pytest.mark.parametrize("r, a", [(1.5, 1.0), (1.5, 2.0), (2.5, 1.0), (3.5, 0.5)])
    def test_cumulants_follow_the_power_law(self, r, a):
        spec = PvfSpec(r=r, a=a)
        for theta in (-2.0, -0.7):
            _, mean, variance = spec.cumulants(theta)
            assert variance == pytest.approx(a * mean ** r, rel=1e-12)

    @pytest.mark.parametrize("r", [1.5, 2.5])
    def test_theta_of_mean_inverts_the_mean(self, r):
        spec = PvfSpec(r=r, a=1.5)
        theta = float(spec.theta_of_mean(2.0))
        assert spec.cumulants(theta)[1] == pytest.approx(2.0, rel=1e-12)

    def test_cases(self):
        assert PvfSpec(1.5).case == 1
        assert PvfSpec(1.5).gamma == pytest.approx(-1.0)
        assert PvfSpec(2.5).case == 2
        assert PvfSpec(2.5).gamma == pytest.approx(1.0 / 3.0)

    @pytest.mark.parametrize("r", [2.0, 3.0, 0.5])
    def test_exponents_outside_the_path(self, r):
        with pytest.raises(RfUnavailable):
            PvfSpec(r=r)

    def test_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            PvfSpec(r=1.5, a=-1.0)


class TestSampling:
    def test_poisson_sample_mean(self):
        nef = get_family("poisson")
        theta = 0.3
        draws = nef.sample(theta, rng_seed=11, count=100_000)
        mean = math.exp(theta)
        se = math.sqrt(mean / len(draws))
        assert abs(draws.mean() - mean) < 4 * se

    def test_inverse_cdf_sampler_for_atom_families(self):
        nef = get_family("abel")
        theta = -1.5
        _, mean, variance = nef.cumulant_derivs(theta)
        draws = nef.sample(theta, rng_seed=3, count=50_000)
        assert abs(draws.mean() - mean) < 4 * math.sqrt(variance / len(draws))

    def test_samples_are_reproducible(self):
        nef = get_family("negbin(2)")
        assert_allclose(nef.sample(-1.0, 5, 100), nef.sample(-1.0, 5, 100))

    def test_pvf_compound_poisson_sample_mean(self):
        nef = get_family("pvf(1.5)")
        theta = -1.0
        _, mean, variance = nef.exact_cumulants(theta)
        draws = nef.sample(theta, rng_seed=2, count=100_000)
        assert abs(draws.mean() - mean) < 4 * math.sqrt(variance / len(draws))

    @pytest.mark.parametrize("name", ["ghs", "ressel", "pvf(2.5)"])
    def test_families_without_a_sampler(self, name):
        nef = get_family(name)
        assert not nef.has_sampler
        with pytest.raises(SamplerUnavailable):
            nef.sample(nef.probe_range[0], 0, 10)

    def test_sampling_checks_theta(self):
        with pytest.raises(ThetaOutOfDomain):
            get_family("gamma(2)").sample(1.5, 0, 10)


class TestExactWeights:
    def test_takacs_weights_are_catalan(self):
        ctx = make_context(30)
        weights = get_family("takacs").exact_weights(ctx, 6)
        assert [int(w) for w in weights] == [1, 1, 2, 5, 14, 42, 132]

    def test_double_and_exact_weights_agree(self):
        ctx = make_context(30)
        nef = get_family("large-arcsine")
        exact = np.array([float(w) for w in nef.exact_weights(ctx, 12)])
        assert_allclose(nef.weights(12), exact, rtol=1e-12)
        assert_allclose(exact[:4], [1.0, 1.0, 1.5, 17.0 / 6.0], rtol=1e-14)


class TestTiltedLaw:
    def test_poisson_laplace(self):
        assert get_family("poisson").laplace(math.log(2.0)) == pytest.approx(math.e, rel=1e-12)

    def test_binomial_laplace_and_variance(self):
        nef = get_family("binomial(2)")
        assert nef.laplace(0.7) == pytest.approx((1 + math.exp(0.7)) ** 2 / 4, rel=1e-12)
        assert nef.cumulant_derivs(0.0)[2] == pytest.approx(0.5, rel=1e-12)

    def test_poisson_mean_inverse(self):
        assert get_family("poisson").mean_inverse(2.0) == pytest.approx(math.log(2.0), rel=1e-10)

    def test_tilted_atoms(self):
        assert get_family("poisson").tilted(math.log(2.0), 0) == pytest.approx(math.exp(-2.0), rel=1e-12)
        theta = 0.5
        expected = math.exp(2 * theta) / (1 + math.exp(theta)) ** 2
        assert get_family("binomial(2)").tilted(theta, 2) == pytest.approx(expected, rel=1e-12)
        assert get_family("binomial(2)").tilted(theta, 1.5) == 0.0

    def test_binomial_empirical_pmf(self):
        draws = get_family("binomial(2)").sample(0.0, rng_seed=1, count=100_000)
        pmf = np.bincount(draws.astype(int), minlength=3) / len(draws)
        assert_allclose(pmf, [0.25, 0.5, 0.25], atol=0.01)

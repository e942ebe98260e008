"""
Tests for the latent row-space experiments: the Jacobi eigensolver, subspace
distances, the seeded generator and the experiment ladder.
"""

import logging
import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from nef_toolkit.errors import DegenerateSpectrum, MeanOutOfDomain
from nef_toolkit.families import get_family
from nef_toolkit.latent import (
    ExperimentConfig,
    LatentModel,
    dk_bias_check,
    dk_hat,
    draw_factors,
    draw_model,
    generate,
    gram_adjusted,
    jacobi_eigh,
    principal_angles,
    run_experiment,
    subspace_distance,
    summarize,
    top_r_subspace,
)
from nef_toolkit.reduction.validation import build_reduction_function


class TestJacobi:
    def test_matches_numpy(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(8, 8))
        matrix = a + a.T
        values, vectors = jacobi_eigh(matrix)
        expected_values, expected_vectors = np.linalg.eigh(matrix)
        assert_allclose(values, expected_values[::-1], atol=1e-10)
        overlaps = np.abs(np.sum(vectors * expected_vectors[:, ::-1], axis=0))
        assert_allclose(overlaps, np.ones(8), atol=1e-8)

    def test_reconstructs_the_matrix(self):
        matrix = np.array([[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 1.0]])
        values, vectors = jacobi_eigh(matrix)
        assert_allclose(vectors @ np.diag(values) @ vectors.T, matrix, atol=1e-10)
        assert np.all(np.diff(values) <= 0)

    def test_converges_in_a_few_sweeps_without_warnings(self, caplog):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(20, 20))
        caplog.set_level(logging.DEBUG, logger="nef_toolkit.latent.linalg")
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            values, _ = jacobi_eigh(a @ a.T)
        assert_allclose(values, np.linalg.eigvalsh(a @ a.T)[::-1], rtol=1e-10, atol=1e-10)
        messages = [record.getMessage() for record in caplog.records]
        assert not any("stopped after" in message for message in messages)
        sweeps = [int(m.split(" sweeps")[0].rsplit(" ", 1)[1]) for m in messages if m.startswith("Jacobi converged")]
        assert sweeps and sweeps[-1] <= 12

    @pytest.mark.parametrize("matrix", [
        np.ones((2, 3)),
        np.array([[1.0, 2.0], [0.0, 1.0]]),
        np.eye(65),
    ])
    def test_rejects_bad_input(self, matrix):
        with pytest.raises(ValueError):
            jacobi_eigh(matrix)


class TestSubspaces:
    def test_degenerate_spectrum_warns(self):
        with pytest.warns(DegenerateSpectrum):
            top_r_subspace(np.eye(4), 2)

    def test_rank_must_fit(self):
        with pytest.raises(ValueError):
            top_r_subspace(np.eye(3), 4)

    def test_distance_between_coordinate_axes(self):
        e1 = np.array([[1.0], [0.0], [0.0]])
        e2 = np.array([[0.0], [1.0], [0.0]])
        assert subspace_distance(e1, e2) == pytest.approx(math.sqrt(2.0))
        assert subspace_distance(e1, -e1) == pytest.approx(0.0)

    def test_distance_needs_matching_shapes(self):
        with pytest.raises(ValueError):
            subspace_distance(np.eye(3)[:, :1], np.eye(3)[:, :2])

    def test_principal_angle(self):
        e1 = np.array([[1.0], [0.0]])
        diagonal = np.array([[1.0], [1.0]]) / math.sqrt(2.0)
        assert_allclose(principal_angles(e1, diagonal), [math.pi / 4])


class TestGenerator:
    def test_model_means_must_be_in_the_domain(self):
        model = LatentModel(loadings=np.ones((3, 1)), factors=-np.ones((1, 2)), family="poisson")
        with pytest.raises(MeanOutOfDomain):
            model.check(get_family("poisson"))

    def test_bounded_domains_are_respected(self):
        factors = draw_factors(2, 4, 0)
        model = draw_model("binomial(2)", 50, factors, 0)
        model.check(get_family("binomial(2)"))
        assert model.means.max() < 2.0

    def test_columns_draw_from_their_own_streams(self):
        factors = draw_factors(2, 3, 1)
        model = draw_model("poisson", 100, factors, 1)
        changed = factors.copy()
        changed[:, 2] *= 1.3
        other = LatentModel(loadings=model.loadings, factors=changed, family="poisson")
        first = generate(model, 9)
        second = generate(other, 9)
        assert_allclose(first[:, :2], second[:, :2])
        assert_allclose(generate(model, 9), first)

    def test_adjusted_gram_subtracts_the_diagonal(self):
        y = np.array([[1.0, 2.0], [3.0, 4.0]])
        gram = gram_adjusted(y, np.array([1.0, 2.0]))
        assert_allclose(gram, [[4.0, 7.0], [7.0, 8.0]])

    def test_variance_estimate_averages_phi_over_rows(self):
        _, rf = build_reduction_function("binomial(2)")
        y = np.array([[0.0, 1.0, 2.0], [2.0, 1.0, 1.0]])
        assert_allclose(dk_hat(y, rf), [0.0, 1.0, 0.5])
        _, identity = build_reduction_function("poisson")
        assert_allclose(dk_hat(y, identity), y.mean(axis=0))

    @pytest.mark.parametrize("family", ["poisson", "negbin(2)"])
    def test_variance_estimate_is_unbiased(self, family):
        report = dk_bias_check(family, k=50, n=4, r=2, replicates=200, seed=3)
        assert report.replicates == 200
        assert len(report.truth) == 4
        assert all(se > 0 for se in report.standard_error)
        assert report.unbiased

    def test_biased_estimate_is_flagged(self):
        _, squares = build_reduction_function("gamma(2)")
        report = dk_bias_check("poisson", k=50, n=4, r=2, replicates=200, seed=3, rf=squares)
        assert not report.unbiased


class TestExperimentConfig:
    def test_defaults(self):
        config = ExperimentConfig()
        assert config.family == "poisson"
        assert config.k_ladder == [200, 2000, 20000]

    @pytest.mark.parametrize("values", [
        {"k_ladder": [2000, 200]},
        {"k_ladder": []},
        {"r": 5, "n": 4},
        {"n": 10, "k_ladder": [5, 50]},
        {"n": 65},
        {"colour": "red"},
    ])
    def test_invalid_configs(self, values):
        with pytest.raises(ValidationError):
            ExperimentConfig(**values)

    def test_from_file(self, tmp_path):
        path = tmp_path / "latent.cfg"
        path.write_text(
            "# ladder for a quick run\n"
            "family = negbin(2)\n"
            "n = 5\n"
            "k-ladder = 100, 1000  # two rungs\n"
            "replicates = 3\n"
        )
        config = ExperimentConfig.from_file(path)
        assert config.family == "negbin(2)"
        assert config.n == 5
        assert config.k_ladder == [100, 1000]
        assert config.replicates == 3

    def test_from_file_needs_key_value_lines(self, tmp_path):
        path = tmp_path / "broken.cfg"
        path.write_text("family poisson\n")
        with pytest.raises(ValueError):
            ExperimentConfig.from_file(path)


class TestExperiment:
    def test_poisson_ladder_converges(self):
        config = ExperimentConfig(family="poisson", n=10, r=2, k_ladder=[200, 2000, 20000], replicates=20, seed=0)
        run = run_experiment(config)
        assert len(run.results) == 60
        assert not run.errors
        summary = summarize(run)
        assert [rung.k for rung in summary.rungs] == [200, 2000, 20000]
        medians = [rung.median_distance for rung in summary.rungs]
        assert medians[0] > medians[1] > medians[2]
        assert summary.decreasing
        assert summary.adjusted_win_rate >= 0.9
        assert not summary.adjustment_invariant

    def test_normal_adjustment_is_a_spectral_shift(self):
        config = ExperimentConfig(family="normal", n=4, r=1, k_ladder=[100, 400], replicates=2, seed=5)
        summary = summarize(run_experiment(config))
        assert summary.adjustment_invariant
        assert summary.note

    def test_runs_are_reproducible(self):
        config = ExperimentConfig(family="poisson", n=4, r=1, k_ladder=[50], replicates=2, seed=7)
        first = run_experiment(config)
        second = run_experiment(config)
        assert [r.distance for r in first.results] == [r.distance for r in second.results]

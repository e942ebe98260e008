"""
Tests for the toolkit service: command validation, handler injection, the
queries and the artifacts the commands write.
"""

import math

import pytest

from nef_toolkit.errors import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION_FAILED
from nef_toolkit.features.toolkit import ToolkitService
import nef_toolkit.features.toolkit.commands.validate_family as validate_family_module
from nef_toolkit.features.toolkit.commands.validate_family import (
    ALL_FAMILIES,
    ValidateFamilyCommand,
    ValidateFamilyHandler,
    ValidateFamilyResult,
)
from nef_toolkit.features.toolkit.models import exit_code_for, slug
from nef_toolkit.features.toolkit.service import get_toolkit_service, reset_toolkit_service
from nef_toolkit.latent import ExperimentConfig
from nef_toolkit.reduction.validation import PROBES, CheckResult, FamilyReport
from nef_toolkit.services.storage import ArtifactStorageService
from nef_toolkit.settings import settings


class RecordingValidateHandler(ValidateFamilyHandler):
    def __init__(self):
        self.commands = []

    def handle(self, command: ValidateFamilyCommand) -> ValidateFamilyResult:
        self.commands.append(command)
        return ValidateFamilyResult(success=True, passed=True)


@pytest.fixture
def storage(tmp_path):
    return ArtifactStorageService.at(str(tmp_path))


@pytest.fixture
def service(storage):
    return ToolkitService(storage_service=storage)


class TestCommandValidation:
    def test_family_and_all_are_exclusive(self):
        handler = RecordingValidateHandler()
        service = ToolkitService(validate_family_handler=handler)
        for kwargs in ({}, {"family": "poisson", "all_families": True}):
            result = service.validate_family(**kwargs)
            assert not result.success
            assert result.exit_code == EXIT_USAGE
        assert handler.commands == []

    def test_handler_receives_the_command(self):
        handler = RecordingValidateHandler()
        service = ToolkitService(validate_family_handler=handler)
        result = service.validate_family(family="abel", probes=3)
        assert result.success
        assert handler.commands[0].families == ("abel",)
        assert handler.commands[0].probes == 3

    def test_non_positive_tolerance_is_a_usage_error(self):
        service = ToolkitService(validate_family_handler=RecordingValidateHandler())
        assert service.validate_family(family="abel", tol=0.0).exit_code == EXIT_USAGE

    def test_exit_codes_for_plain_exceptions(self):
        assert exit_code_for(ValueError("bad")) == EXIT_USAGE
        assert exit_code_for(FileNotFoundError("missing")) == EXIT_USAGE
        assert exit_code_for(RuntimeError("boom")) == 1

    def test_slug(self):
        assert slug("negbin(3)") == "negbin-3"
        assert slug("pvf(2.5)") == "pvf-2.5"


class TestValidateFamily:
    def test_report_is_written(self, service, storage):
        result = service.validate_family(family="poisson", probes=3)
        assert result.success
        assert result.passed
        assert result.exit_code == EXIT_OK
        report = storage.read_json("validate-poisson")
        assert report["passed"] is True
        assert report["summary"][0]["family"] == "poisson"

    def test_unknown_family(self, service):
        result = service.validate_family(family="weibull")
        assert not result.success
        assert result.exit_code == EXIT_USAGE
        assert result.error_type == "UnknownFamily"

    def test_a_crashing_family_does_not_stop_the_others(self, service, storage, monkeypatch):
        def fake_validate(name, tol=None, probes=PROBES):
            if name == "abel":
                raise ArithmeticError("overflow in the atom table")
            check = CheckResult(
                check="master-identity", family=name, target=1.0, computed=1.0,
                relerr=0.0, tolerance=1e-6, passed=True,
            )
            return FamilyReport(family=name, checks=[check])

        monkeypatch.setattr(validate_family_module, "validate_family", fake_validate)
        result = service.validate_family(all_families=True)
        assert result.success
        assert not result.passed
        assert result.exit_code == EXIT_VALIDATION_FAILED
        assert len(result.outcomes) == len(ALL_FAMILIES)
        failed = [outcome for outcome in result.outcomes if not outcome.passed]
        assert [outcome.report.family for outcome in failed] == ["abel"]
        assert failed[0].report.error == "ArithmeticError: overflow in the atom table"
        summary = storage.read_json("validate-all")["summary"]
        assert sum(1 for row in summary if row["passed"]) == len(ALL_FAMILIES) - 1


class TestQueries:
    def test_poisson_table(self, service):
        result = service.rf_table("poisson", n_max=10)
        assert result.success
        assert result.rf_kind == "closed-form"
        assert result.table.column("x") == list(range(11))
        assert result.table.column("phi") == pytest.approx(list(range(11)))
        assert result.table.column("phi_pipeline") == pytest.approx(list(range(11)), abs=1e-8)

    def test_abel_table(self, service):
        result = service.rf_table("abel", n_max=6)
        assert result.rf_kind == "atom-table"
        expected = [(n + 1) ** (n - 1) / math.factorial(n) for n in range(7)]
        assert result.table.column("beta") == pytest.approx(expected, rel=1e-12)

    def test_binomial_falls_back_to_the_closed_form(self, service):
        result = service.rf_table("binomial(2)", n_max=6)
        assert result.success
        assert result.table.columns == ["x", "phi", "beta"]
        assert result.table.column("x") == [0, 1, 2]
        assert result.table.column("phi") == pytest.approx([0.0, 1.0, 0.0])

    def test_normal_grid(self, service):
        result = service.rf_table("normal", x_max=5.0, points=11)
        assert result.table.column("x")[0] == pytest.approx(-5.0)
        assert result.table.column("phi") == pytest.approx([1.0] * 11)

    def test_bad_grid_is_a_usage_error(self, service):
        result = service.rf_table("gamma", x_min=3.0, x_max=1.0)
        assert result.exit_code == EXIT_USAGE

    def test_unknown_family(self, service):
        result = service.rf_table("weibull")
        assert not result.success
        assert result.exit_code == EXIT_USAGE

    def test_series_coefficients(self, service):
        result = service.series_coeffs("geometric", order=10)
        assert result.success
        assert result.max_residual < 1e-10
        assert result.table.column("beta") == pytest.approx([1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796])
        assert result.table.columns == ["n", "beta", "rho_cumulant", "rho_generator", "residual"]

    def test_series_coefficients_need_a_positive_order(self, service):
        assert service.series_coeffs("exp", order=0).exit_code == EXIT_USAGE

    def test_unknown_generator(self, service):
        result = service.series_coeffs("sin", order=5)
        assert result.exit_code == EXIT_USAGE


class TestCommands:
    def test_conjecture_scan_writes_table_and_report(self, service, storage):
        result = service.scan_conjecture(n_max=1, u1_grid=[(0.3, 1.0), (-0.3, 1.0)])
        assert result.success
        assert result.passed
        assert result.cells == 2
        assert result.vf_impossible == 1
        rows = storage.read_table("conjecture-n1")
        assert [row["verdict"] for row in rows] == ["vf-impossible", "no-contradiction"]
        report = storage.read_json("conjecture-n1-report")
        assert report["passed"] is True
        assert len(report["necessity"]) == 2
        assert storage.list_artifacts() == ["conjecture-n1-report.json", "conjecture-n1.csv"]

    def test_conjecture_scan_needs_n(self, service):
        result = service.scan_conjecture(n_max=0)
        assert not result.success
        assert result.exit_code == EXIT_USAGE

    def test_simulation_writes_its_artifacts(self, service, storage):
        config = ExperimentConfig(family="poisson", n=4, r=1, k_ladder=[50, 500], replicates=2, seed=1)
        result = service.run_simulation(config, keep_details=False)
        assert result.success
        assert [rung.k for rung in result.summary.rungs] == [50, 500]
        assert len(storage.read_table("latent-poisson")) == 4
        assert storage.read_json("latent-poisson-summary")["config"]["family"] == "poisson"
        assert result.artifacts.details is None


class TestServiceSingleton:
    def test_reset(self):
        reset_toolkit_service()
        first = get_toolkit_service()
        assert get_toolkit_service() is first
        reset_toolkit_service()
        assert get_toolkit_service() is not first
        reset_toolkit_service()


class TestSettings:
    def test_reload_reads_the_environment(self, monkeypatch):
        monkeypatch.setenv("NEF_TOOLKIT_THREADS", "3")
        monkeypatch.setenv("NEF_TOOLKIT_OUTPUT_DIR", "elsewhere")
        settings.reload()
        try:
            assert settings.threads == 3
            assert settings.output_dir == "elsewhere"
            assert settings.get("missing", "fallback") == "fallback"
        finally:
            monkeypatch.undo()
            settings.reload()

    def test_thread_cap_is_at_least_one(self, monkeypatch):
        monkeypatch.setenv("NEF_TOOLKIT_THREADS", "0")
        settings.reload()
        try:
            assert settings.threads == 1
        finally:
            monkeypatch.undo()
            settings.reload()

"""
Tests for the nef-toolkit command line: artifacts written under --output-dir
and the exit codes of each subcommand.
"""

import csv
import json
import math

import pytest
from typer.testing import CliRunner

from nef_toolkit.cli import app


runner = CliRunner()


def invoke(tmp_path, *args):
    return runner.invoke(app, ["--output-dir", str(tmp_path), *args])


def read_csv(path):
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


class TestRfTable:
    def test_poisson_table(self, tmp_path):
        result = invoke(tmp_path, "rf-table", "--family", "poisson", "--n-max", "10")
        assert result.exit_code == 0, result.output
        rows = read_csv(tmp_path / "rf-poisson.csv")
        assert [float(row["phi"]) for row in rows] == pytest.approx(list(range(11)))
        assert list(rows[0])[:2] == ["x", "phi"]

    def test_abel_weights(self, tmp_path):
        result = invoke(tmp_path, "rf-table", "-f", "abel", "--n-max", "5", "-o", "abel-table")
        assert result.exit_code == 0, result.output
        rows = read_csv(tmp_path / "abel-table.csv")
        expected = [(n + 1) ** (n - 1) / math.factorial(n) for n in range(6)]
        assert [float(row["beta"]) for row in rows] == pytest.approx(expected, rel=1e-12)

    def test_json_format(self, tmp_path):
        result = invoke(tmp_path, "rf-table", "-f", "gamma(2)", "--points", "5", "--format", "json")
        assert result.exit_code == 0, result.output
        document = json.loads((tmp_path / "rf-gamma-2.json").read_text())
        assert document["columns"] == ["x", "phi"]
        assert len(document["rows"]) == 5

    def test_unknown_family(self, tmp_path):
        result = invoke(tmp_path, "rf-table", "--family", "weibull")
        assert result.exit_code == 2


class TestCoeffs:
    def test_generator_table(self, tmp_path):
        result = invoke(tmp_path, "coeffs", "--generator", "geometric", "--order", "8")
        assert result.exit_code == 0, result.output
        rows = read_csv(tmp_path / "coeffs-geometric.csv")
        assert [float(row["beta"]) for row in rows] == pytest.approx([1, 1, 2, 5, 14, 42, 132, 429, 1430])

    def test_unknown_generator(self, tmp_path):
        assert invoke(tmp_path, "coeffs", "--generator", "sin").exit_code == 2


class TestValidate:
    def test_poisson_passes(self, tmp_path):
        result = invoke(tmp_path, "validate", "--family", "poisson", "--probes", "3")
        assert result.exit_code == 0, result.output
        assert json.loads((tmp_path / "validate-poisson.json").read_text())["passed"] is True

    def test_unreachable_tolerance_fails(self, tmp_path):
        result = invoke(tmp_path, "validate", "--family", "poisson", "--probes", "3", "--tol", "1e-30")
        assert result.exit_code == 1

    def test_needs_a_target(self, tmp_path):
        assert invoke(tmp_path, "validate").exit_code == 2


class TestConjecture:
    def test_custom_grid(self, tmp_path):
        result = invoke(tmp_path, "conjecture", "--n-max", "2", "--grid", "0.3+1j;-2+0.5j")
        assert result.exit_code == 0, result.output
        rows = read_csv(tmp_path / "conjecture-n2.csv")
        assert len(rows) == 4
        assert (tmp_path / "conjecture-n2-report.json").exists()

    def test_n_max_must_be_positive(self, tmp_path):
        assert invoke(tmp_path, "conjecture", "--n-max", "0").exit_code == 2

    def test_bad_grid(self, tmp_path):
        assert invoke(tmp_path, "conjecture", "--n-max", "1", "--grid", "1-1j").exit_code == 2


class TestSimulate:
    def test_missing_config_file(self, tmp_path):
        result = invoke(tmp_path, "simulate", "--config", str(tmp_path / "absent.cfg"))
        assert result.exit_code == 2

    def test_invalid_override(self, tmp_path):
        assert invoke(tmp_path, "simulate", "--n", "4", "--r", "6").exit_code == 2

    def test_small_run(self, tmp_path):
        config = tmp_path / "latent.cfg"
        config.write_text("family = poisson\nn = 4\nr = 1\nk_ladder = 50, 500\nreplicates = 2\n")
        result = invoke(tmp_path, "simulate", "--config", str(config), "--seed", "3", "--no-details")
        assert result.exit_code == 0, result.output
        assert len(read_csv(tmp_path / "latent-poisson.csv")) == 4
        summary = json.loads((tmp_path / "latent-poisson-summary.json").read_text())
        assert summary["config"]["seed"] == 3

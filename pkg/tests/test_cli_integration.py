"""
End-to-end tests of the simulate -> analyze -> perturb -> report workflow
"""

import csv
import json

import pytest

from app.main import run_cli
from app.request_models import RunConfig
from app.services import euler_service, pipeline_service
from app.services.measure_service import parametrized_distance
from app.utils.error_handlers import EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION, SchemeError
from tests.conftest import write_config


def files_of(directory):
    return {path.name: path.read_bytes() for path in sorted(directory.iterdir())}


class TestExitCodes:
    """Test run_cli exit codes and diagnostics"""

    def test_simulate_succeeds(self, alternating_config, tmp_path):
        """Test simulate writes the snapshot and exits 0"""
        out = tmp_path / "out"
        assert run_cli(["simulate", "--config", str(alternating_config), "--out", str(out)]) == EXIT_OK
        assert (out / "snapshot.bin").exists()

    def test_empty_dictionary_exits_one(self, tmp_path, capsys):
        """Test an empty observable list is a validation error naming the dictionary"""
        path = write_config(tmp_path, """
            [family]
            kind = "fixture"
            fixture = "alternating"

            [analysis.dictionary]
            observables = []
        """)
        assert run_cli(["analyze", "--config", str(path), "--out", str(tmp_path / "out")]) == EXIT_VALIDATION
        assert "dictionary" in capsys.readouterr().err

    def test_unknown_subcommand_exits_one(self):
        """Test an unknown command is a usage error"""
        assert run_cli(["integrate"]) == EXIT_VALIDATION

    def test_missing_config_exits_one(self, tmp_path, capsys):
        """Test a missing config file is reported with its path"""
        assert run_cli(["simulate", "--config", str(tmp_path / "absent.toml")]) == EXIT_VALIDATION
        assert "absent.toml" in capsys.readouterr().err

    def test_malformed_checkpoints_exit_one(self, alternating_config):
        """Test a non-numeric --checkpoints value is a usage error"""
        assert run_cli(["analyze", "--config", str(alternating_config), "--checkpoints", "a,b"]) == EXIT_VALIDATION

    def test_checkpoint_override_beyond_family_exits_one(self, alternating_config, tmp_path, capsys):
        """Test overrides are validated against the family length"""
        code = run_cli([
            "analyze", "--config", str(alternating_config), "--out", str(tmp_path / "out"),
            "--checkpoints", "512,1024",
        ])
        assert code == EXIT_VALIDATION
        assert "checkpoint = 1024" in capsys.readouterr().err

    def test_report_without_reports_exits_one(self, tmp_path):
        """Test report on a directory without reports fails"""
        assert run_cli(["report", "--out", str(tmp_path)]) == EXIT_VALIDATION

    def test_report_needs_a_location(self):
        """Test report requires --out or --config"""
        assert run_cli(["report"]) == EXIT_VALIDATION

    def test_solver_failure_exits_two(self, mocker, constant_euler_config, tmp_path, capsys):
        """Test a scheme failure is a runtime error"""
        mocker.patch.object(euler_service, "lf_step", side_effect=SchemeError("non-finite values at t = 0", member=1))
        code = run_cli(["simulate", "--config", str(constant_euler_config), "--out", str(tmp_path / "out")])
        assert code == EXIT_RUNTIME
        assert "non-finite values" in capsys.readouterr().err


class TestWorkflow:
    """Test the workflow artifacts"""

    def test_constant_preset_consistency(self, constant_euler_config, tmp_path):
        """Test the constant preset has vanishing residuals and no mass drift"""
        out = tmp_path / "out"
        assert run_cli(["simulate", "-c", str(constant_euler_config), "-o", str(out)]) == EXIT_OK
        report = json.loads((out / "consistency_report.json").read_text())
        assert report["preset"] == "constant"
        for member in report["members"]:
            assert member["e1_max"] <= 1e-10
            assert member["e2_max"] <= 1e-10
            assert member["mass_drift"] <= 1e-12

    def test_euler_analysis_reports_reynolds_defect(self, constant_euler_config, tmp_path):
        """Test analyzing Euler states attaches the defect and boundary diagnostics"""
        out = tmp_path / "out"
        config = RunConfig.load(constant_euler_config)
        pipeline_service.run_simulate(config, out)
        result = pipeline_service.run_analyze(config, out)
        assert result.report.euler is not None
        assert result.report.euler.reynolds_min_eigenvalue == pytest.approx(0.0, abs=1e-12)
        assert result.report.euler.boundary_energy_gap == pytest.approx(0.0, abs=1e-12)

    def test_alternating_analysis(self, alternating_config, tmp_path):
        """Test the alternating fixture converges to 1/2 delta_0 + 1/2 delta_1"""
        out = tmp_path / "out"
        assert run_cli(["simulate", "-c", str(alternating_config), "-o", str(out)]) == EXIT_OK
        assert run_cli(["analyze", "-c", str(alternating_config), "-o", str(out)]) == EXIT_OK
        report = json.loads((out / "s_report.json").read_text())
        assert report["converged"]
        assert report["weight_independent"]
        assert report["barycenter_range"] == [[0.5, 0.5]]
        assert report["dirac_gap"] == pytest.approx(0.5)
        assert "measure" not in report

        with (out / "limit_measure.csv").open(newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert len(rows) == 8
        assert {row["u0"] for row in rows} == {"0.0", "1.0"}
        assert all(float(row["weight"]) == 0.5 for row in rows)

    def test_perturbation_respects_measure_bound(self, alternating_config, tmp_path):
        """Test the perturbed limit measure stays within the recorded W1 bound"""
        out = tmp_path / "out"
        config = RunConfig.load(alternating_config)
        pipeline_service.run_simulate(config, out)
        original = pipeline_service.run_analyze(config, out)
        perturbed = pipeline_service.run_perturb(config, out)
        reanalyzed = pipeline_service.run_analyze(config, out, snapshot=perturbed.snapshot)

        assert perturbed.record.indices_modified == 22
        assert reanalyzed.report_path.name == "perturbed_s_report.json"
        distance = parametrized_distance(original.report.measure, reanalyzed.report.measure, s=1.0)
        assert distance <= perturbed.record.bounds[-1].measure_bound

    def test_perturbed_analysis_reuses_dictionary(self, alternating_config, tmp_path):
        """Test both analyses share observable definitions and Cesaro estimates move within the recorded bound"""
        out = tmp_path / "out"
        config = RunConfig.load(alternating_config)
        pipeline_service.run_simulate(config, out)
        original = pipeline_service.run_analyze(config, out)
        perturbed = pipeline_service.run_perturb(config, out)
        reanalyzed = pipeline_service.run_analyze(config, out, snapshot=perturbed.snapshot)

        assert (out / "dictionary.json").exists()
        assert [b.center[0] for b in original.report.observables] == pytest.approx([-0.1, 0.5, 1.1])
        assert reanalyzed.report.observables == original.report.observables
        saved = json.loads((out / "perturbed_s_report.json").read_text())["observables"]
        assert saved == json.loads(original.report_path.read_text())["observables"]

        bound = perturbed.record.bounds[-1].cesaro_bound
        for before, after in zip(original.report.entries, reanalyzed.report.entries):
            assert (before.observable_id, before.weight) == (after.observable_id, after.weight)
            if before.weight == "constant":
                assert abs(after.verdict.estimate - before.verdict.estimate) <= bound

    def test_stale_dictionary_is_rebuilt_from_original_snapshot(self, alternating_config, tmp_path):
        """Test other lattice settings rebuild the dictionary over snapshot.bin, not the analyzed snapshot"""
        out = tmp_path / "out"
        config = RunConfig.load(alternating_config)
        pipeline_service.run_simulate(config, out)
        perturbed = pipeline_service.run_perturb(config, out)
        finer = config.model_copy(update={"analysis": config.analysis.model_copy(
            update={"dictionary": config.analysis.dictionary.model_copy(update={"points_per_dim": 5})})})
        result = pipeline_service.run_analyze(finer, out, snapshot=perturbed.snapshot)
        assert [b.center[0] for b in result.report.observables] == pytest.approx([-0.1, 0.2, 0.5, 0.8, 1.1])

    def test_seed_override_reaches_record(self, alternating_config, tmp_path):
        """Test --seed overrides [run].seed"""
        out = tmp_path / "out"
        assert run_cli(["perturb", "-c", str(alternating_config), "-o", str(out), "--seed", "5"]) == EXIT_OK
        assert json.loads((out / "perturbation_record.json").read_text())["seed"] == 5

    def test_report_merges_original_and_perturbed(self, alternating_config, tmp_path):
        """Test report writes one row per (report, b, w, checkpoint)"""
        out = tmp_path / "out"
        config, args = str(alternating_config), ["-o", str(tmp_path / "out")]
        assert run_cli(["simulate", "-c", config, *args]) == EXIT_OK
        assert run_cli(["analyze", "-c", config, *args]) == EXIT_OK
        assert run_cli(["perturb", "-c", config, *args]) == EXIT_OK
        assert run_cli(["analyze", "-c", config, *args, "--snapshot", str(out / "perturbed_snapshot.bin")]) == EXIT_OK
        assert run_cli(["report", *args]) == EXIT_OK

        with (out / "report_table.csv").open(newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert {row["report"] for row in rows} == {"s_report", "perturbed_s_report"}
        # 3 observables x 6 weights x 4 checkpoints per report
        assert len(rows) == 2 * 72

    def test_runs_are_byte_identical(self, alternating_config, tmp_path):
        """Test two runs with one seed write byte-identical files"""
        for name in ("first", "second"):
            args = ["-c", str(alternating_config), "-o", str(tmp_path / name)]
            for command in ("simulate", "analyze", "perturb"):
                assert run_cli([command, *args]) == EXIT_OK
        assert files_of(tmp_path / "first") == files_of(tmp_path / "second")


class TestTyperApp:
    """Test the Typer application through CliRunner"""

    def test_help_lists_commands(self, runner, cli_app):
        """Test --help names every workflow command"""
        result = runner.invoke(cli_app, ["--help"])
        assert result.exit_code == 0
        for command in ("simulate", "analyze", "perturb", "report"):
            assert command in result.output

    def test_simulate_through_runner(self, runner, cli_app, alternating_config, tmp_path):
        """Test simulate runs through the Typer app"""
        result = runner.invoke(cli_app, ["simulate", "--config", str(alternating_config), "--out", str(tmp_path / "out")])
        assert result.exit_code == 0
        assert (tmp_path / "out" / "snapshot.bin").exists()

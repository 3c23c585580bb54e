"""Tests for the command line entry point."""

import pytest

import occbac.cli as cli
from occbac import __version__
from occbac.connectors.scenario_file import save_field, save_scenario
from occbac.estimators.state import MarginalField
from occbac.geometry.grid import GridSpec
from occbac.scenarios.toy import checkerboard_truth, generate_toy
from occbac.utils.errors import SelfCheckError
from occbac.validators.selfcheck import CheckResult


@pytest.fixture
def scenario_and_field(tmp_path):
    scenario = generate_toy(checkerboard_truth(), n_pings=1, samples_per_cell=1, seed=0)
    scenario_path = save_scenario(scenario, tmp_path / "scenario.txt")
    field_path = save_field(MarginalField.uniform(16), scenario.spec, tmp_path / "field.txt")
    return scenario_path, field_path


class TestParser:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["--version"])
        assert info.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_command_required(self):
        with pytest.raises(SystemExit):
            cli.build_parser().parse_args([])

    def test_run_options(self):
        args = cli.build_parser().parse_args(["run", "c.yaml", "--seed", "4", "--jobs", "2", "--out-dir", "o"])
        assert (args.config, args.seed, args.trials, args.jobs, args.out_dir) == ("c.yaml", 4, None, 2, "o")


class TestRun:
    def test_success(self, toy_config_file, tmp_path, capsys):
        out = tmp_path / "out"
        code = cli.main(["--quiet", "run", str(toy_config_file), "--trials", "1", "--out-dir", str(out)])
        assert code == 0
        assert (out / "metrics.csv").exists()
        printed = capsys.readouterr().out
        assert "1 trial(s) written" in printed
        assert "CM-default" in printed

    def test_overrides_reach_orchestrator(self, monkeypatch, toy_config_file):
        seen = {}

        class FakeOrchestrator:
            def __init__(self, path, overrides):
                seen.update(path=path, overrides=overrides)

            def run(self, show_progress):
                seen["show_progress"] = show_progress
                return {"trials": 0, "output_dir": "x", "summary": {}}

        monkeypatch.setattr(cli, "ExperimentOrchestrator", FakeOrchestrator)
        assert cli.main(["run", str(toy_config_file), "--seed", "5"]) == 0
        assert seen["overrides"] == {"seed": 5, "trials": None, "jobs": None, "output_dir": None}
        assert seen["show_progress"] is True

    def test_missing_config_is_io_error(self, tmp_path):
        assert cli.main(["run", str(tmp_path / "absent.yaml")]) == 4

    def test_config_error(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("scenario: {type: toy}\nestimators: []\n", encoding="utf-8")
        assert cli.main(["run", str(path)]) == 2

    def test_capacity_error(self, tmp_path):
        path = tmp_path / "big.yaml"
        path.write_text(
            "scenario:\n  type: toy\n  grid: {cell_size: 0.5, n_x: 5, n_y: 5}\n  samples_per_cell: 1\n"
            "estimators:\n  - method: GF\n",
            encoding="utf-8",
        )
        out = tmp_path / "out"
        assert cli.main(["run", str(path), "--out-dir", str(out)]) == 3
        assert not (out / "metrics.csv").exists()


class TestExport:
    def test_writes_image(self, scenario_and_field, tmp_path):
        scenario_path, field_path = scenario_and_field
        out = tmp_path / "field.pgm"
        assert cli.main(["export", str(scenario_path), str(field_path), str(out), "--pixels-per-cell", "2"]) == 0
        assert out.read_bytes().startswith(b"P5")

    def test_grid_mismatch(self, scenario_and_field, tmp_path):
        scenario_path, _ = scenario_and_field
        other = save_field(MarginalField.uniform(4), GridSpec(cell_size=1.0, n_x=2, n_y=2), tmp_path / "small.txt")
        assert cli.main(["export", str(scenario_path), str(other), str(tmp_path / "x.pgm")]) == 2

    def test_malformed_scenario(self, scenario_and_field, tmp_path):
        _, field_path = scenario_and_field
        broken = tmp_path / "broken.txt"
        broken.write_text("occbac-scenario 9\n", encoding="utf-8")
        assert cli.main(["export", str(broken), str(field_path), str(tmp_path / "x.pgm")]) == 7


class TestSelfcheck:
    def test_reports_results(self, monkeypatch, capsys):
        monkeypatch.setattr(cli, "run_selfcheck", lambda seed: [CheckResult("demo", True, "max error 0")])
        assert cli.main(["selfcheck", "--seed", "3"]) == 0
        assert "ok  demo" in capsys.readouterr().out

    def test_failure_exit_code(self, monkeypatch):
        def failing(seed):
            raise SelfCheckError("demo: off by one")

        monkeypatch.setattr(cli, "run_selfcheck", failing)
        assert cli.main(["selfcheck"]) == 6

    def test_unexpected_error(self, monkeypatch):
        def broken(seed):
            raise KeyError("boom")

        monkeypatch.setattr(cli, "run_selfcheck", broken)
        assert cli.main(["selfcheck"]) == 1

"""Tests for the scenario and field text formats."""

import numpy as np
import pytest

from occbac.connectors.scenario_file import (
    format_field,
    format_scenario,
    load_field,
    load_scenario,
    parse_field,
    parse_scenario,
    save_field,
    save_scenario,
)
from occbac.estimators.state import MarginalField
from occbac.geometry.grid import ConeFov, GridSpec
from occbac.scenarios.sonar import generate_cone_sweep, straight_path
from occbac.scenarios.toy import checkerboard_truth, generate_toy, rectangles_truth
from occbac.utils.errors import ScenarioFormatError


@pytest.fixture
def toy_scenario():
    return generate_toy(checkerboard_truth(), n_pings=2, samples_per_cell=1, seed=21)


@pytest.fixture
def cone_scenario():
    spec = GridSpec(origin=(-0.5, 0.0), cell_size=0.5, n_x=12, n_y=6)
    truth = rectangles_truth(spec, [((2.0, 0.5), (3.0, 1.0))])
    fov = ConeFov(beamwidth=0.3, range_min=0.5, range_max=3.0, n_intervals=10)
    path = straight_path((0.0, 2.9), (5.0, 2.9), 4)
    return generate_cone_sweep(spec, truth, path, fov, alpha=1.5, seed=8)


class TestToyFiles:
    def test_layout(self, toy_scenario):
        lines = format_scenario(toy_scenario).splitlines()
        assert lines[0] == "occbac-scenario 1"
        assert lines[1] == "kind toy"
        assert lines[2] == "grid 0.0 0.0 0.5 4 4"
        assert lines[3] == "seed 21"
        assert lines[4:8] == ["param pd 0.8", "param pfa 0.08", "param n_pings 2", "param samples_per_cell 1"]
        assert lines[8] == "truth"
        assert lines[9:13] == ["1010", "0101", "1010", "0101"]
        assert lines[13] == "pings 2"
        assert lines[14].startswith("ping 0 ")
        assert len(lines) == 16

    def test_round_trip(self, toy_scenario, tmp_path):
        path = save_scenario(toy_scenario, tmp_path / "toy.txt")
        loaded = load_scenario(path)
        assert loaded.kind == "toy"
        assert loaded.spec == toy_scenario.spec
        assert loaded.truth == toy_scenario.truth
        assert loaded.seed == 21
        assert loaded.parameters == toy_scenario.parameters
        assert loaded.fov is None and loaded.path is None
        for a, b in zip(loaded.pings, toy_scenario.pings):
            np.testing.assert_array_equal(a.j, b.j)
            np.testing.assert_array_equal(a.sample_locations, b.sample_locations)
            np.testing.assert_array_equal(a.sample_cells, b.sample_cells)


class TestConeFiles:
    def test_round_trip_is_exact(self, cone_scenario):
        loaded = parse_scenario(format_scenario(cone_scenario))
        assert loaded.fov == cone_scenario.fov
        assert loaded.spec == cone_scenario.spec
        assert loaded.parameters == {"pd": 0.8, "pfa": 0.08, "alpha": 1.5}
        assert len(loaded.path) == 4
        for a, b in zip(loaded.pings, cone_scenario.pings):
            assert a.pose == b.pose
            np.testing.assert_array_equal(a.j, b.j)
            np.testing.assert_array_equal(a.sample_locations, b.sample_locations)

    def test_null_parameter(self, cone_scenario):
        text = format_scenario(cone_scenario).replace("param alpha 1.5", "param alpha null")
        assert parse_scenario(text).parameters["alpha"] is None


class TestMalformedScenarios:
    def _lines(self, scenario):
        return format_scenario(scenario).splitlines()

    def _parse(self, lines):
        return parse_scenario("\n".join(lines) + "\n")

    def test_header(self, toy_scenario):
        lines = self._lines(toy_scenario)
        with pytest.raises(ScenarioFormatError, match="line 1"):
            self._parse(["nope 1"] + lines[1:])
        with pytest.raises(ScenarioFormatError, match="version"):
            self._parse(["occbac-scenario 2"] + lines[1:])

    def test_truth_row_width(self, toy_scenario):
        lines = self._lines(toy_scenario)
        lines[10] = "01"
        with pytest.raises(ScenarioFormatError, match="line 11"):
            self._parse(lines)

    def test_bad_measurement_character(self, toy_scenario):
        lines = self._lines(toy_scenario)
        lines[14] = "ping 0 " + "2" * 16
        with pytest.raises(ScenarioFormatError, match="line 15"):
            self._parse(lines)

    def test_truncated(self, toy_scenario):
        lines = self._lines(toy_scenario)
        with pytest.raises(ScenarioFormatError, match="unexpected end"):
            self._parse(lines[:-1])

    def test_trailing_content(self, toy_scenario):
        with pytest.raises(ScenarioFormatError, match="trailing"):
            self._parse(self._lines(toy_scenario) + ["ping 2 0000"])

    def test_toy_needs_lattice_size(self, toy_scenario):
        lines = [line for line in self._lines(toy_scenario) if not line.startswith("param samples_per_cell")]
        with pytest.raises(ScenarioFormatError, match="samples_per_cell"):
            self._parse(lines)

    def test_lattice_size_not_square(self, toy_scenario):
        lines = [line.replace("samples_per_cell 1", "samples_per_cell 5") for line in self._lines(toy_scenario)]
        with pytest.raises(ScenarioFormatError, match="square"):
            self._parse(lines)

    def test_bad_grid(self, toy_scenario):
        lines = self._lines(toy_scenario)
        lines[2] = "grid 0 0 -1 4 4"
        with pytest.raises(ScenarioFormatError, match="line 3"):
            self._parse(lines)

    def test_cone_ping_arity(self, cone_scenario):
        lines = format_scenario(cone_scenario).splitlines()
        index = next(i for i, line in enumerate(lines) if line.startswith("ping 0 "))
        lines[index] = "ping 0 1.0 2.0 " + "0" * 10
        with pytest.raises(ScenarioFormatError, match="5 values"):
            self._parse(lines)

    def test_is_a_value_error(self, tmp_path):
        assert issubclass(ScenarioFormatError, ValueError)
        with pytest.raises(FileNotFoundError):
            load_scenario(tmp_path / "missing.txt")


class TestFieldFiles:
    def test_round_trip(self, tmp_path, rng):
        spec = GridSpec(origin=(1.0, -2.0), cell_size=0.25, n_x=3, n_y=2)
        field = MarginalField(rng.uniform(0, 1, 6))
        loaded, loaded_spec = load_field(save_field(field, spec, tmp_path / "f.txt"))
        assert loaded_spec == spec
        np.testing.assert_array_equal(loaded.probs, field.probs)

    def test_size_mismatch(self):
        spec = GridSpec(cell_size=1.0, n_x=2, n_y=1)
        with pytest.raises(ValueError):
            format_field(MarginalField([0.5]), spec)
        text = format_field(MarginalField([0.5, 0.5]), spec)
        with pytest.raises(ScenarioFormatError, match="more than 2"):
            parse_field(text + "0.5\n")
        with pytest.raises(ScenarioFormatError, match="unexpected end"):
            parse_field("\n".join(text.splitlines()[:-1]) + "\n")

    def test_probability_range(self):
        text = "occbac-field 1\ngrid 0.0 0.0 1.0 2 1\n0.5\n1.5\n"
        with pytest.raises(ScenarioFormatError, match="line 4"):
            parse_field(text)
        with pytest.raises(ScenarioFormatError, match="not a number"):
            parse_field("occbac-field 1\ngrid 0.0 0.0 1.0 1 1\nabc\n")

"""Tests for the cone-sensor sweep generator."""

import logging
import math

import numpy as np
import pytest

from occbac.estimators.state import OccupancyMap
from occbac.geometry.grid import ConeFov, GridSpec, SensorPose, sample_points
from occbac.scenarios.base import VehiclePath
from occbac.scenarios.sonar import arc_path, generate_cone_sweep, occupied_intervals, straight_path
from occbac.scenarios.toy import rectangles_truth


@pytest.fixture
def corridor():
    """4 x 4 unit grid with only cell 6, centered at (2.5, 1.5), occupied."""
    spec = GridSpec(cell_size=1.0, n_x=4, n_y=4)
    bits = np.zeros(16, dtype=np.uint8)
    bits[6] = 1
    pose = SensorPose(position=(0.0, 1.5), heading=0.0)
    fov = ConeFov(beamwidth=0.5, range_min=0.0, range_max=4.0, n_intervals=4)
    return spec, OccupancyMap(bits), pose, fov


class TestPaths:
    def test_straight_starboard(self):
        path = straight_path((0.0, 0.0), (10.0, 0.0), 3)
        assert len(path) == 3
        assert path.spacing == pytest.approx(5.0)
        assert path.poses[1].position == pytest.approx((5.0, 0.0))
        assert all(pose.heading == pytest.approx(-math.pi / 2) for pose in path.poses)

    def test_straight_port(self):
        path = straight_path((0.0, 0.0), (0.0, 4.0), 2, look="port")
        assert path.poses[0].heading == pytest.approx(math.pi)

    def test_single_pose(self):
        path = straight_path((1.0, 1.0), (1.0, 1.0), 1, look="forward")
        assert path.spacing == 0.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            straight_path((0, 0), (1, 0), 0)
        with pytest.raises(ValueError):
            straight_path((0, 0), (1, 0), 2, look="up")

    def test_arc(self):
        path = arc_path((0.0, 0.0), 2.0, 0.0, math.pi / 2, 3)
        assert path.poses[0].position == pytest.approx((2.0, 0.0))
        assert path.poses[-1].position == pytest.approx((0.0, 2.0), abs=1e-12)
        # counter-clockwise travel looks outward to starboard
        assert path.poses[0].heading == pytest.approx(0.0)
        assert path.spacing == pytest.approx(math.pi / 2)
        with pytest.raises(ValueError):
            arc_path((0.0, 0.0), 0.0, 0.0, 1.0, 3)


class TestOccupiedIntervals:
    def test_single_target(self, corridor):
        spec, truth, pose, fov = corridor
        np.testing.assert_array_equal(occupied_intervals(spec, truth, pose, fov), [False, False, True, False])

    def test_target_outside_cone(self, corridor):
        spec, truth, _, fov = corridor
        away = SensorPose(position=(0.0, 1.5), heading=math.pi)
        assert not occupied_intervals(spec, truth, away, fov).any()


class TestGenerateConeSweep:
    def test_noiseless(self, corridor):
        spec, truth, pose, fov = corridor
        path = VehiclePath(poses=(pose, pose))
        scenario = generate_cone_sweep(spec, truth, path, fov, pd=1.0, pfa=0.0)
        for ping in scenario.pings:
            np.testing.assert_array_equal(ping.j, [0, 0, 1, 0])
            np.testing.assert_allclose(ping.sample_locations, sample_points(pose, fov))
            assert ping.is_cone
        assert scenario.kind == "cone_sweep"
        assert scenario.parameters == {"pd": 1.0, "pfa": 0.0, "alpha": None}

    def test_reproducible(self):
        spec = GridSpec(cell_size=0.5, n_x=20, n_y=10)
        truth = rectangles_truth(spec, [((4.0, 1.0), (6.0, 2.0))])
        fov = ConeFov(beamwidth=0.3, range_min=0.5, range_max=6.0, n_intervals=22)
        path = straight_path((0.0, 4.9), (9.9, 4.9), 12)
        a = generate_cone_sweep(spec, truth, path, fov, seed=3)
        b = generate_cone_sweep(spec, truth, path, fov, seed=3)
        for x, y in zip(a.pings, b.pings):
            np.testing.assert_array_equal(x.j, y.j)
        assert a.path is path
        assert a.fov == fov

    def test_attenuation_lowers_detections(self, corridor):
        spec, truth, pose, fov = corridor
        path = VehiclePath(poses=(pose,) * 400)
        plain = generate_cone_sweep(spec, truth, path, fov, pd=1.0, pfa=0.0, seed=1)
        faded = generate_cone_sweep(spec, truth, path, fov, pd=1.0, pfa=0.0, alpha=1.0, seed=1)
        plain_hits = sum(int(ping.j[2]) for ping in plain.pings)
        faded_hits = sum(int(ping.j[2]) for ping in faded.pings)
        assert plain_hits == 400
        # interval 2 is centered at 2.5 m, so pd drops to 1 / 3.5
        assert faded_hits == pytest.approx(400 / 3.5, abs=4 * math.sqrt(400 * (1 / 3.5) * (2.5 / 3.5)))

    def test_warns_without_detections(self, corridor, caplog):
        spec, truth, pose, fov = corridor
        path = straight_path((0.0, 1.5), (0.0, 1.5), 1, look="forward")
        with caplog.at_level(logging.WARNING):
            generate_cone_sweep(spec, truth, path, fov, pd=0.0, pfa=0.0)
        assert "no detection" in caplog.text

    def test_argument_checks(self, corridor):
        spec, truth, pose, fov = corridor
        path = straight_path((0.0, 1.5), (0.0, 1.5), 1, look="forward")
        with pytest.raises(ValueError):
            generate_cone_sweep(spec, truth, path, fov, pfa=-0.1)
        with pytest.raises(ValueError):
            generate_cone_sweep(spec, truth, path, fov, alpha=-1.0)
        with pytest.raises(ValueError):
            generate_cone_sweep(spec, OccupancyMap([1]), path, fov)
        with pytest.raises(ValueError):
            generate_cone_sweep(spec, truth, VehiclePath(poses=()), fov)

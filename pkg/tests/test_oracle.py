"""Tests for the brute-force references."""

import math

import numpy as np
import pytest

from occbac.channel.bac import BacRow, BacTable, or_gate_zero_likelihood
from occbac.estimators.state import JointPosterior, Ping
from occbac.geometry.grid import ConeFov, SensorPose
from occbac.utils.errors import CapacityError, InconsistentMeasurementError
from occbac.validators.oracle import (
    BATCH_CELL_LIMIT,
    batch_posterior,
    linear_marginals,
    mc_or_gate,
    measurement_probability,
    point_in_sector,
)
from occbac.validators.selfcheck import allowed_exceedances, or_gate_exceedances


class TestBatchPosterior:
    def test_measurement_probability(self):
        table = BacTable(np.array([[0.9, 0.7], [0.5, 0.5]]), np.array([[0.2, 0.4], [0.1, 0.1]]), (3, 8))
        value = measurement_probability([0, 1], {3: 0, 8: 1}, table)
        assert float(value) == pytest.approx(0.9 * 0.4 * (1 - 0.5 * 0.1))

    def test_single_ping_by_hand(self):
        table = BacTable(np.array([[0.9]]), np.array([[0.2]]), (0,))
        ping = Ping(s=0, j=[1], sample_locations=[[0.0, 0.0]])
        posterior = batch_posterior([ping], JointPosterior.uniform((0,)), [table])
        assert linear_marginals(posterior)[0] == pytest.approx(0.8 / 0.9)

    def test_cell_limit(self):
        cells = tuple(range(BATCH_CELL_LIMIT + 1))
        with pytest.raises(CapacityError):
            batch_posterior([], JointPosterior.uniform(cells), [])

    def test_table_count(self):
        table = BacTable(np.array([[0.9]]), np.array([[0.2]]), (0,))
        with pytest.raises(ValueError):
            batch_posterior([], JointPosterior.uniform((0,)), [table])

    def test_no_explanation(self):
        table = BacTable(np.array([[1.0]]), np.array([[1.0]]), (0,))
        ping = Ping(s=0, j=[1], sample_locations=[[0.0, 0.0]])
        with pytest.raises(InconsistentMeasurementError):
            batch_posterior([ping], JointPosterior.uniform((0,)), [table])


class TestMonteCarloOrGate:
    def test_single_case_within_four_sigma(self):
        row = BacRow(np.array([0.9, 0.7]), np.array([0.2, 0.4]))
        n_samples = 100_000
        analytic = or_gate_zero_likelihood([1, 0], row)
        empirical = mc_or_gate([1, 0], row, n_samples, seed=2024)
        sigma = math.sqrt(analytic * (1 - analytic) / n_samples)
        assert abs(empirical - analytic) <= 4 * sigma

    def test_random_cases_within_chance(self, rng):
        cases = 20
        assert or_gate_exceedances(rng, cases) <= allowed_exceedances(cases)

    def test_allowed_exceedances(self):
        assert allowed_exceedances(10) == 1
        assert allowed_exceedances(100) == 3
        assert allowed_exceedances(10, n_sigma=6.0) == 0

    def test_deterministic_channel(self):
        row = BacRow(np.array([1.0, 1.0]), np.array([0.0, 0.0]))
        assert mc_or_gate([0, 0], row, 10_000, seed=1) == 1.0
        assert mc_or_gate([0, 1], row, 10_000, seed=1) == 0.0

    def test_argument_checks(self):
        row = BacRow(np.array([0.9]), np.array([0.2]))
        with pytest.raises(ValueError):
            mc_or_gate([1], row, 100, seed=0)
        with pytest.raises(ValueError):
            mc_or_gate([1, 0], row, 10_000, seed=0)


class TestPointInSector:
    @pytest.fixture
    def cone(self):
        return SensorPose(position=(0.0, 0.0), heading=0.0), ConeFov(beamwidth=math.pi / 2, range_max=5.0, n_intervals=5)

    def test_membership(self, cone):
        pose, fov = cone
        assert point_in_sector(pose, fov, (3.0, 0.0))
        assert point_in_sector(pose, fov, (2.0, 1.9))
        assert not point_in_sector(pose, fov, (2.0, 2.1))
        assert not point_in_sector(pose, fov, (-1.0, 0.0))
        assert not point_in_sector(pose, fov, (5.1, 0.0))

    def test_sensor_position(self, cone):
        pose, fov = cone
        assert point_in_sector(pose, fov, (0.0, 0.0))
        far_only = ConeFov(beamwidth=0.5, range_min=1.0, range_max=5.0, n_intervals=4)
        assert not point_in_sector(pose, far_only, (0.0, 0.0))

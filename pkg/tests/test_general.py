"""Tests for the exact joint (GF) update."""

import numpy as np
import pytest

from occbac.channel.bac import BacTable, OrGateLikelihood, TransitionModel, build_bac_table
from occbac.estimators.base_estimator import EstimatorSettings
from occbac.estimators.general import (
    GeneralFormulationEstimator,
    LikelihoodCache,
    apply_measurement,
    gf_marginal,
    gf_marginals,
    gf_update,
)
from occbac.estimators.state import JointPosterior, Ping
from occbac.geometry.grid import GridSpec, cell_centers
from occbac.scenarios.toy import checkerboard_truth, generate_toy
from occbac.utils.errors import CapacityError, InconsistentMeasurementError
from occbac.validators.oracle import batch_posterior, linear_marginals
from occbac.validators.selfcheck import random_ping, random_table


def _single_cell_table(p00, p01):
    return BacTable(np.array([[p00]]), np.array([[p01]]), (0,))


class TestGfUpdate:
    def test_single_cell_by_hand(self):
        joint = JointPosterior.uniform((0,))
        ping = Ping(s=0, j=[1], sample_locations=[[0.0, 0.0]])
        updated = gf_update(joint, ping, _single_cell_table(0.9, 0.2))
        # P(j=1|occupied) = 0.8, P(j=1|empty) = 0.1
        assert gf_marginal(updated, 0) == pytest.approx(0.8 / 0.9)

    def test_two_cells_explaining_away(self):
        table = BacTable(np.array([[0.9, 0.9]]), np.array([[0.1, 0.1]]), (0, 1))
        ping = Ping(s=0, j=[1], sample_locations=[[0.0, 0.0]])
        joint = gf_update(JointPosterior.uniform((0, 1)), ping, table)
        likelihood = np.array([1 - 0.81, 1 - 0.09, 1 - 0.09, 1 - 0.01])
        expected = likelihood / likelihood.sum()
        np.testing.assert_allclose(joint.probabilities(), expected, rtol=1e-12)

    def test_matches_batch_enumeration(self, rng):
        for _ in range(15):
            n = int(rng.integers(1, 6))
            cells = tuple(range(n))
            joint = JointPosterior.uniform(cells)
            pings, tables = [], []
            for s in range(int(rng.integers(1, 5))):
                table = random_table(rng, int(rng.integers(1, 4)), cells)
                ping = random_ping(rng, s, table.n_rows)
                joint = gf_update(joint, ping, table)
                pings.append(ping)
                tables.append(table)
            assert joint.is_normalized()
            reference = batch_posterior(pings, JointPosterior.uniform(cells), tables)
            np.testing.assert_allclose(gf_marginals(joint), linear_marginals(reference), atol=1e-10)

    def test_ping_order_does_not_matter(self, rng):
        cells = (0, 1, 2)
        first, second = random_table(rng, 3, cells), random_table(rng, 2, cells)
        ping_a, ping_b = random_ping(rng, 0, 3), random_ping(rng, 1, 2)
        prior = JointPosterior.uniform(cells)
        forward = gf_update(gf_update(prior, ping_a, first), ping_b, second)
        backward = gf_update(gf_update(prior, ping_b, second), ping_a, first)
        np.testing.assert_allclose(forward.log_weights, backward.log_weights, atol=1e-12)

    def test_relabeling_cells_permutes_marginals(self, rng):
        cells = (0, 1, 2, 3)
        perm = [2, 0, 3, 1]
        original = relabeled = JointPosterior.uniform(cells)
        for s in range(4):
            table = random_table(rng, 3, cells)
            ping = random_ping(rng, s, table.n_rows)
            original = gf_update(original, ping, table)
            relabeled = gf_update(relabeled, ping, BacTable(table.p00[:, perm], table.p01[:, perm], cells))
        np.testing.assert_allclose(gf_marginals(relabeled), gf_marginals(original)[perm], atol=1e-12)

    def test_non_uniform_prior(self, rng):
        cells = (0, 1)
        prior = JointPosterior.factorized(cells, [0.2, 0.7])
        table = random_table(rng, 2, cells)
        ping = random_ping(rng, 0, 2)
        reference = batch_posterior([ping], prior, [table])
        np.testing.assert_allclose(
            gf_marginals(gf_update(prior, ping, table)), linear_marginals(reference), atol=1e-12
        )

    def test_impossible_measurement(self):
        joint = JointPosterior.uniform((0,))
        ping = Ping(s=0, j=[1], sample_locations=[[0.0, 0.0]])
        with pytest.raises(InconsistentMeasurementError):
            gf_update(joint, ping, _single_cell_table(1.0, 1.0))

    def test_point_mass_survives_consistent_ping(self):
        joint = JointPosterior.point_mass((0, 1), [1, 0])
        table = BacTable(np.array([[0.9, 0.9]]), np.array([[0.1, 0.1]]), (0, 1))
        updated = gf_update(joint, Ping(s=0, j=[1], sample_locations=[[0.0, 0.0]]), table)
        np.testing.assert_allclose(gf_marginals(updated), [1.0, 0.0])


class TestMarginals:
    def test_agree_with_linear_sum(self, rng):
        log_weights = np.log(rng.dirichlet(np.ones(16)))
        joint = JointPosterior((4, 9, 2, 7), log_weights)
        expected = linear_marginals(joint)
        np.testing.assert_allclose(gf_marginals(joint), expected, atol=1e-12)
        for position, cell in enumerate(joint.subset):
            assert gf_marginal(joint, cell) == pytest.approx(expected[position])

    def test_unknown_cell(self):
        with pytest.raises(ValueError):
            gf_marginal(JointPosterior.uniform((0, 1)), 5)

    def test_apply_measurement_normalizes(self, rng):
        cells = (0, 1, 2)
        table = random_table(rng, 4, cells)
        posterior = apply_measurement(JointPosterior.uniform(cells), rng.integers(0, 2, 4), OrGateLikelihood(table, cells))
        assert posterior.is_normalized(1e-12)


class TestLikelihoodCache:
    def test_reuses_equal_tables(self, rng):
        cache = LikelihoodCache()
        table = random_table(rng, 2, (0, 1))
        copy = BacTable(table.p00.copy(), table.p01.copy(), table.cell_indices)
        assert cache.get(table, (0, 1)) is cache.get(copy, (0, 1))

    def test_evicts_least_recent(self, rng):
        cache = LikelihoodCache(max_entries=2)
        tables = [random_table(rng, 1, (0,)) for _ in range(3)]
        first = cache.get(tables[0], (0,))
        cache.get(tables[1], (0,))
        cache.get(tables[2], (0,))
        assert cache.get(tables[0], (0,)) is not first


class TestGeneralFormulationEstimator:
    def test_capacity(self, toy_grid):
        with pytest.raises(CapacityError):
            GeneralFormulationEstimator(toy_grid, EstimatorSettings(method="GF", subset_cap=8))

    def test_run_matches_manual_updates(self, decay_model):
        spec = GridSpec(cell_size=0.5, n_x=2, n_y=2)
        scenario = generate_toy(checkerboard_truth(spec), n_pings=3, samples_per_cell=4, seed=3, spec=spec)
        settings = EstimatorSettings(method="GF", transition=decay_model)
        trajectory = GeneralFormulationEstimator(spec, settings).run(scenario.pings)
        assert len(trajectory) == 3

        joint = JointPosterior.uniform((0, 1, 2, 3))
        for ping, snapshot in zip(scenario.pings, trajectory.snapshots):
            table = build_bac_table(decay_model, ping.sample_locations, cell_centers(spec), (0, 1, 2, 3))
            joint = gf_update(joint, ping, table)
            np.testing.assert_allclose(snapshot.probs, gf_marginals(joint), atol=1e-12)

    def test_uses_attenuated_by_default(self):
        settings = EstimatorSettings(method="GF")
        assert settings.transition == TransitionModel()

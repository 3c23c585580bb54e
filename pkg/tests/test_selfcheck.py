"""Tests for the self-check suite."""

import numpy as np
import pytest

import occbac.validators.selfcheck as selfcheck
from occbac.utils.errors import SelfCheckError


class TestChecks:
    def test_gf_oracle(self, rng):
        assert selfcheck.check_gf_oracle(rng, instances=5) <= 1e-10

    def test_cone_geometry(self, rng):
        assert selfcheck.check_cone_geometry(rng, cones=5) == 0

    def test_reductions(self, rng):
        assert selfcheck.check_reductions(rng) <= 1e-12

    def test_metric_identities(self, rng):
        assert selfcheck.check_metric_identities(rng) <= 1e-12

    def test_random_table_shape(self, rng):
        table = selfcheck.random_table(rng, 3, (4, 5))
        assert table.p00.shape == (3, 2)
        assert table.cell_indices == (4, 5)
        assert np.all((table.p01 >= 0.05) & (table.p01 <= 0.95))


class TestRunSelfcheck:
    def test_all_checks_pass(self):
        results = selfcheck.run_selfcheck(seed=0)
        assert [result.name for result in results] == [
            "gf_vs_batch",
            "or_gate_monte_carlo",
            "cone_membership",
            "reduction_chain",
            "metric_identities",
        ]
        assert all(result.passed for result in results)

    def test_failure_raises(self, monkeypatch):
        monkeypatch.setattr(selfcheck, "check_gf_oracle", lambda rng: 0.0)
        monkeypatch.setattr(selfcheck, "check_or_gate", lambda rng: 0)
        monkeypatch.setattr(selfcheck, "check_cone_geometry", lambda rng: 0)
        monkeypatch.setattr(selfcheck, "check_reductions", lambda rng: 0.0)
        monkeypatch.setattr(selfcheck, "check_metric_identities", lambda rng: 0.5)
        with pytest.raises(SelfCheckError, match="metric_identities"):
            selfcheck.run_selfcheck()

    def test_error_is_assertion_error(self):
        assert issubclass(SelfCheckError, AssertionError)
        assert SelfCheckError.exit_code == 6

"""
General formulation (GF): exact joint posterior over every map of a cell subset.
"""

import logging
from collections import OrderedDict
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from occbac.channel.bac import BacTable, OrGateLikelihood, build_bac_table
from occbac.estimators.base_estimator import BaseEstimator, MethodTag
from occbac.estimators.state import JointPosterior, MarginalField, Ping, check_subset_size
from occbac.geometry.grid import cell_centers
from occbac.utils.errors import InconsistentMeasurementError

logger = logging.getLogger(__name__)


class LikelihoodCache:
    """Keeps the most recently used OrGateLikelihood objects, keyed by table content."""

    def __init__(self, max_entries: int = 2):
        self.max_entries = max_entries
        self._entries: "OrderedDict[bytes, OrGateLikelihood]" = OrderedDict()

    def get(self, table: BacTable, subset: Sequence[int]) -> OrGateLikelihood:
        key = table.key + np.asarray(subset, dtype=np.int64).tobytes()
        if key in self._entries:
            self._entries.move_to_end(key)
            return self._entries[key]
        likelihood = OrGateLikelihood(table, subset)
        self._entries[key] = likelihood
        if len(self._entries) > self.max_entries:
            self._entries.popitem(last=False)
        return likelihood


def apply_measurement(joint: JointPosterior, j, likelihood: OrGateLikelihood) -> JointPosterior:
    """Multiply the joint by P(j | b) and renormalize (the mu normalization)."""
    updated = joint.log_weights + likelihood.log_likelihood(j)
    norm = logsumexp(updated)
    if not np.isfinite(norm):
        raise InconsistentMeasurementError(
            f"measurement has zero probability under every map of cells {list(joint.subset)}"
        )
    return JointPosterior(joint.subset, updated - norm)


def gf_update(
    joint: JointPosterior,
    ping: Ping,
    table: BacTable,
    likelihood: Optional[OrGateLikelihood] = None,
) -> JointPosterior:
    """
    One sequential Bayes step of the joint posterior.

    Args:
        joint: Posterior after the previous ping
        ping: Current measurement
        table: Transition probabilities, one row per sample of ``ping``
        likelihood: Precomputed likelihood for ``table`` (optional)

    Raises:
        InconsistentMeasurementError: When no map explains the measurement
    """
    if likelihood is None:
        likelihood = OrGateLikelihood(table, joint.subset, cache=False)
    return apply_measurement(joint, ping.j, likelihood)


def gf_marginals(joint: JointPosterior) -> np.ndarray:
    """P(b_r = 1) for every cell of the subset, in subset order."""
    codes = np.arange(1 << joint.n_cells, dtype=np.int64)
    total = logsumexp(joint.log_weights)
    marginals = np.empty(joint.n_cells)
    for position in range(joint.n_cells):
        occupied = ((codes >> position) & 1) == 1
        marginals[position] = np.exp(logsumexp(joint.log_weights[occupied]) - total)
    return np.clip(marginals, 0.0, 1.0)


def gf_marginal(joint: JointPosterior, r: int) -> float:
    """
    P(b_r = 1): posterior mass of every map with cell ``r`` occupied.

    Raises:
        ValueError: When ``r`` is not part of the joint subset
    """
    if r not in joint.subset:
        raise ValueError(f"cell {r} is not part of the joint subset")
    position = joint.subset.index(r)
    codes = np.arange(1 << joint.n_cells, dtype=np.int64)
    occupied = ((codes >> position) & 1) == 1
    value = np.exp(logsumexp(joint.log_weights[occupied]) - logsumexp(joint.log_weights))
    return float(min(max(value, 0.0), 1.0))


class GeneralFormulationEstimator(BaseEstimator):
    """
    Exact joint posterior over the whole grid.

    Feasible only while B stays within the subset cap; every ping's samples
    are related to every cell through the BAC table.
    """

    method = MethodTag.GF

    def __init__(self, spec, settings):
        super().__init__(spec, settings)
        check_subset_size(spec.n_cells, settings.subset_cap)
        self._cells = tuple(range(spec.n_cells))
        self._centers = cell_centers(spec)
        self._cache = LikelihoodCache()

    def initial_state(self) -> JointPosterior:
        return JointPosterior.uniform(self._cells, self.settings.subset_cap)

    def update(self, state: JointPosterior, ping: Ping) -> JointPosterior:
        table = build_bac_table(self.settings.transition, ping.sample_locations, self._centers, self._cells)
        return gf_update(state, ping, table, self._cache.get(table, state.subset))

    def marginals(self, state: JointPosterior) -> MarginalField:
        return MarginalField(gf_marginals(state))

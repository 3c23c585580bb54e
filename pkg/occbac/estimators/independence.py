"""
Independence baselines: the per-cell Bayes update (IM) and the log-odds
occupancy grid with an inverse sensor model (CM).

Both relate each observed cell to a set of measurement indices (its
association); all other samples are ignored for that cell.
"""

import logging
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial.distance import cdist
from scipy.special import expit, logit

from occbac.channel.bac import TransitionModel, transition_matrices
from occbac.estimators.base_estimator import BaseEstimator, MethodTag
from occbac.estimators.state import MarginalField, Ping
from occbac.geometry.grid import (
    GridSpec,
    cell_centers,
    cells_in_cone,
    interval_centers,
    interval_index,
    project_onto_centerline,
)
from occbac.utils.errors import InconsistentMeasurementError

logger = logging.getLogger(__name__)

Association = Dict[int, List[int]]


class CmParams(BaseModel):
    """Inverse sensor model of the conventional log-odds grid."""

    model_config = ConfigDict(frozen=True)

    p_hit: float = Field(0.7, gt=0.5, lt=1, description="Occupancy of a cell associated with a 1")
    p_miss: float = Field(0.4, gt=0, lt=0.5, description="Occupancy of a cell associated with a 0")


def associate_measurements(spec: GridSpec, ping: Ping, neighborhood: Optional[float] = None) -> Association:
    """
    Measurement indices related to each observed cell.

    Lattice pings associate every cell with the samples it owns plus, with
    ``neighborhood`` set, every sample within that distance of its center. Cone pings
    project each cell in the cone onto the centerline; the cell gets the
    interval holding its projection, or, with ``neighborhood`` set, every
    interval whose center lies within that distance of the projection
    (falling back to the holding interval when none does).

    Returns:
        Mapping cell index -> nonempty list of measurement indices
    """
    if ping.sample_cells is not None:
        association: Association = {}
        for k, owner in enumerate(ping.sample_cells):
            if owner >= 0:
                association.setdefault(int(owner), []).append(k)
        if neighborhood is not None:
            distances = cdist(cell_centers(spec), ping.sample_locations)
            for r in range(spec.n_cells):
                nearby = set(int(k) for k in np.flatnonzero(distances[r] <= neighborhood))
                nearby.update(association.get(r, []))
                if nearby:
                    association[r] = sorted(nearby)
        return association

    if not ping.is_cone:
        raise ValueError(f"ping {ping.s} has neither a cone nor sample owners")

    cells = cells_in_cone(spec, ping.pose, ping.fov)
    if cells.size == 0:
        return {}
    projections = project_onto_centerline(ping.pose, ping.fov, cell_centers(spec)[cells])
    centers = interval_centers(ping.fov)
    association = {}
    for cell, projection in zip(cells, projections):
        nearest = interval_index(ping.fov, float(projection))
        if neighborhood is None:
            kappa = [nearest]
        else:
            kappa = [int(k) for k in np.flatnonzero(np.abs(centers - projection) <= neighborhood)] or [nearest]
        association[int(cell)] = kappa
    return association


def im_update(
    field: MarginalField,
    ping: Ping,
    association: Association,
    model: TransitionModel,
    spec: GridSpec,
) -> MarginalField:
    """
    Independent single-cell Bayes update.

    For each associated cell ``r`` with prior ``p``::

        P(b_r=1 | j) ~ p     * prod_k [p01 (1-j_k) + (1-p01) j_k]
        P(b_r=0 | j) ~ (1-p) * prod_k [p00 (1-j_k) + (1-p00) j_k]

    with the transition probabilities evaluated at the sample/cell distance.

    Raises:
        ValueError: For an empty measurement set
        InconsistentMeasurementError: When both hypotheses have zero probability
    """
    if not association:
        return field
    probs = field.probs.copy()
    centers = cell_centers(spec)
    for r, kappa in association.items():
        if not kappa:
            raise ValueError(f"cell {r} has an empty measurement set")
        kappa = np.asarray(kappa, dtype=int)
        distances = cdist(ping.sample_locations[kappa], centers[r : r + 1]).ravel()
        p00, p01 = transition_matrices(model, distances)
        j = ping.j[kappa]
        with np.errstate(divide="ignore"):
            log_one = np.log(np.where(j == 1, 1.0 - p01, p01)).sum() + np.log(probs[r])
            log_zero = np.log(np.where(j == 1, 1.0 - p00, p00)).sum() + np.log1p(-probs[r])
        norm = np.logaddexp(log_one, log_zero)
        if not np.isfinite(norm):
            raise InconsistentMeasurementError(f"measurement of ping {ping.s} is impossible for cell {r}")
        probs[r] = np.exp(log_one - norm)
    return MarginalField(np.clip(probs, 0.0, 1.0))


def cm_update(log_odds: np.ndarray, ping: Ping, association: Association, params: CmParams) -> np.ndarray:
    """
    Additive log-odds update with a fixed inverse sensor model.

    Every associated sample adds ``logit(p_hit)`` to its cell when it reads 1
    and ``logit(p_miss)`` when it reads 0. Unobserved cells keep their value.

    Returns:
        A new log-odds array
    """
    updated = np.array(log_odds, dtype=float)
    hit, miss = logit(params.p_hit), logit(params.p_miss)
    for r, kappa in association.items():
        hits = int(np.sum(ping.j[np.asarray(kappa, dtype=int)]))
        updated[r] += hits * hit + (len(kappa) - hits) * miss
    return updated


def log_odds_to_field(log_odds: np.ndarray) -> MarginalField:
    return MarginalField(expit(np.asarray(log_odds, dtype=float)))


class IndependenceEstimator(BaseEstimator):
    """IM: every cell updated on its own from its associated samples."""

    method = MethodTag.IM

    def initial_state(self) -> MarginalField:
        return MarginalField.uniform(self.spec.n_cells)

    def update(self, state: MarginalField, ping: Ping) -> MarginalField:
        association = associate_measurements(self.spec, ping, self.settings.neighborhood)
        return im_update(state, ping, association, self.settings.transition, self.spec)

    def marginals(self, state: MarginalField) -> MarginalField:
        return state


class ConventionalEstimator(BaseEstimator):
    """CM: log-odds occupancy grid."""

    method = MethodTag.CM

    def __init__(self, spec, settings):
        super().__init__(spec, settings)
        self.params = CmParams(p_hit=settings.p_hit, p_miss=settings.p_miss)

    def initial_state(self) -> np.ndarray:
        return np.zeros(self.spec.n_cells)

    def update(self, state: np.ndarray, ping: Ping) -> np.ndarray:
        association = associate_measurements(self.spec, ping, self.settings.neighborhood)
        return cm_update(state, ping, association, self.params)

    def marginals(self, state: np.ndarray) -> MarginalField:
        return log_odds_to_field(state)

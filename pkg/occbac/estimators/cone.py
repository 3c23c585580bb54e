"""
Cone Only (CO) and Range Gate Only (RGO) estimators.

Only per-cell marginals persist between pings. Each ping rebuilds a
factorized joint over the active cell subset, runs the exact joint update
on it and writes the new marginals back; cells outside the subset keep
their values.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from occbac.channel.bac import OrGateLikelihood, TransitionModel, build_bac_table
from occbac.estimators.base_estimator import BaseEstimator, MethodTag
from occbac.estimators.general import LikelihoodCache, apply_measurement, gf_marginals
from occbac.estimators.state import DEFAULT_SUBSET_CAP, JointPosterior, MarginalField, Ping
from occbac.geometry.grid import GridSpec, RangeGate, cell_centers, cells_in_cone, make_range_gates

logger = logging.getLogger(__name__)


def _joint_cell_update(
    field: MarginalField,
    cells: Sequence[int],
    j: np.ndarray,
    sample_locations: np.ndarray,
    spec: GridSpec,
    model: TransitionModel,
    cap: int,
    cache: Optional[LikelihoodCache] = None,
) -> MarginalField:
    cells = [int(c) for c in cells]
    joint = JointPosterior.factorized(cells, field.probs[cells], cap)
    table = build_bac_table(model, sample_locations, cell_centers(spec)[cells], cells)
    if cache is not None:
        likelihood = cache.get(table, cells)
    else:
        likelihood = OrGateLikelihood(table, cells, cache=False)
    posterior = apply_measurement(joint, j, likelihood)
    return field.with_values(cells, gf_marginals(posterior))


def co_update(
    field: MarginalField,
    ping: Ping,
    spec: GridSpec,
    model: TransitionModel,
    cap: int = DEFAULT_SUBSET_CAP,
    cells: Optional[Sequence[int]] = None,
    cache: Optional[LikelihoodCache] = None,
) -> MarginalField:
    """
    Joint update of the cells inside the ping's cone.

    Args:
        field: Marginals after the previous ping
        ping: Current measurement
        spec: Grid geometry
        model: Transition model for the BAC table
        cap: Largest joint subset
        cells: Observed cell subset; defaults to ``cells_in_cone`` for cone
            pings and to the whole grid for lattice pings
        cache: Likelihood cache reused across pings

    Raises:
        CapacityError: When the observed subset exceeds ``cap``
        InconsistentMeasurementError: When no configuration explains the ping
    """
    if cells is None:
        if ping.is_cone:
            cells = cells_in_cone(spec, ping.pose, ping.fov)
        else:
            cells = range(spec.n_cells)
    cells = sorted(int(c) for c in cells)
    if not cells:
        logger.warning(f"Ping {ping.s}: no cell inside the cone, field unchanged")
        return field
    return _joint_cell_update(field, cells, ping.j, ping.sample_locations, spec, model, cap, cache)


def rgo_update(
    field: MarginalField,
    ping: Ping,
    gates: Sequence[RangeGate],
    spec: GridSpec,
    model: TransitionModel,
    cap: int = DEFAULT_SUBSET_CAP,
    cache: Optional[LikelihoodCache] = None,
) -> MarginalField:
    """
    Joint update of each range gate separately.

    Each gate sees only its own measurement window. Gates run in ascending
    range order, so a cell shared by overlapping gates is updated by the
    nearer gate first and the farther gate reads that result.

    Raises:
        CapacityError: When a gate holds more than ``cap`` cells
    """
    ordered = sorted(gates, key=lambda gate: (gate.band[0], gate.measurement_indices[0]))
    for gate in ordered:
        if not gate.cell_indices:
            logger.debug(f"Ping {ping.s}: range gate {gate.band} holds no cell")
            continue
        window = list(gate.measurement_indices)
        if window[-1] >= ping.n_samples:
            raise ValueError(f"gate window {window} exceeds the {ping.n_samples} samples of ping {ping.s}")
        field = _joint_cell_update(
            field,
            sorted(gate.cell_indices),
            ping.j[window],
            ping.sample_locations[window],
            spec,
            model,
            cap,
            cache,
        )
    return field


def section_gates(spec: GridSpec, ping: Ping, sections: int) -> List[RangeGate]:
    """
    Split a lattice ping into ``sections`` contiguous row blocks.

    Each block keeps the samples owned by its cells as its measurement
    window.

    Raises:
        ValueError: For a cone ping, more sections than rows, or samples of a
            block that are not contiguous
    """
    if ping.sample_cells is None:
        raise ValueError("section gates need a lattice ping with sample owners")
    if not 1 <= sections <= spec.n_y:
        raise ValueError(f"sections must lie in [1, {spec.n_y}], got {sections}")

    gates = []
    bounds = np.linspace(0, spec.n_y, sections + 1).round().astype(int)
    owner_rows = ping.sample_cells // spec.n_x
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        cells = tuple(range(lo * spec.n_x, hi * spec.n_x))
        window = tuple(int(k) for k in np.flatnonzero((owner_rows >= lo) & (owner_rows < hi)))
        y0 = spec.origin[1]
        gates.append(
            RangeGate(
                measurement_indices=window,
                cell_indices=cells,
                band=(y0 + lo * spec.cell_size, y0 + hi * spec.cell_size),
            )
        )
    return gates


class ConeOnlyEstimator(BaseEstimator):
    """CO: joint update over the current cone (the whole grid for lattice pings)."""

    method = MethodTag.CO

    def __init__(self, spec, settings):
        super().__init__(spec, settings)
        self._cache = LikelihoodCache()

    def initial_state(self) -> MarginalField:
        return MarginalField.uniform(self.spec.n_cells)

    def update(self, state: MarginalField, ping: Ping) -> MarginalField:
        return co_update(
            state, ping, self.spec, self.settings.transition, self.settings.subset_cap, cache=self._cache
        )

    def marginals(self, state: MarginalField) -> MarginalField:
        return state


class RangeGateEstimator(BaseEstimator):
    """RGO: joint update per range gate (per row section for lattice pings)."""

    method = MethodTag.RGO

    def __init__(self, spec, settings):
        super().__init__(spec, settings)
        self._cache = LikelihoodCache(max_entries=max(2, settings.sections))

    def gates(self, ping: Ping) -> List[RangeGate]:
        if not ping.is_cone:
            return section_gates(self.spec, ping, self.settings.sections)
        cells = cells_in_cone(self.spec, ping.pose, ping.fov)
        return make_range_gates(
            self.spec, cells, ping.pose, ping.fov, self.settings.gate_count, self.settings.overlap
        )

    def initial_state(self) -> MarginalField:
        return MarginalField.uniform(self.spec.n_cells)

    def update(self, state: MarginalField, ping: Ping) -> MarginalField:
        return rgo_update(
            state,
            ping,
            self.gates(ping),
            self.spec,
            self.settings.transition,
            self.settings.subset_cap,
            cache=self._cache,
        )

    def marginals(self, state: MarginalField) -> MarginalField:
        return state

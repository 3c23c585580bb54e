"""
Brute-force references for the production inference and geometry.

Everything here works in plain linear arithmetic (extended precision where
available) on tiny instances and deliberately avoids the log-domain helpers
and vectorized tables used by the estimators.
"""

import logging
import math
from itertools import product
from typing import Dict, Sequence, Tuple

import numpy as np

from occbac.channel.bac import BacRow, BacTable
from occbac.estimators.state import JointPosterior, Ping
from occbac.geometry.grid import ConeFov, SensorPose
from occbac.utils.errors import CapacityError, InconsistentMeasurementError

logger = logging.getLogger(__name__)

BATCH_CELL_LIMIT = 10
MIN_MONTE_CARLO_SAMPLES = 10_000
SECTOR_TOLERANCE = 1e-12


def _enumerate(n: int):
    """Yield (code, bits) for every configuration of n cells."""
    for bits in product((0, 1), repeat=n):
        bits = bits[::-1]
        yield sum(b << i for i, b in enumerate(bits)), bits


def measurement_probability(j: Sequence[int], bits: Dict[int, int], table: BacTable) -> np.longdouble:
    """P(j | b) for one map, by explicit products over the table."""
    probability = np.longdouble(1)
    for k in range(table.n_rows):
        all_zero = np.longdouble(1)
        for column, cell in enumerate(table.cell_indices):
            p00 = np.longdouble(table.p00[k, column])
            p01 = np.longdouble(table.p01[k, column])
            all_zero *= p01 if bits[cell] else p00
        probability *= all_zero if j[k] == 0 else 1 - all_zero
    return probability


def batch_posterior(
    pings: Sequence[Ping],
    prior: JointPosterior,
    tables: Sequence[BacTable],
) -> JointPosterior:
    """
    Posterior over all maps from all pings at once.

    Args:
        pings: Measurements
        prior: Joint prior over the cells the tables cover
        tables: One BacTable per ping

    Raises:
        CapacityError: For more than BATCH_CELL_LIMIT cells
        InconsistentMeasurementError: When every map has zero probability
    """
    n = prior.n_cells
    if n > BATCH_CELL_LIMIT:
        raise CapacityError(f"batch oracle enumerates at most {BATCH_CELL_LIMIT} cells, got {n}")
    if len(pings) != len(tables):
        raise ValueError(f"{len(pings)} pings but {len(tables)} tables")

    weights = np.zeros(1 << n, dtype=np.longdouble)
    for code, bits in _enumerate(n):
        by_cell = dict(zip(prior.subset, bits))
        weight = np.longdouble(math.exp(prior.log_weights[code])) if np.isfinite(prior.log_weights[code]) else 0
        for ping, table in zip(pings, tables):
            weight *= measurement_probability(ping.j, by_cell, table)
        weights[code] = weight

    total = weights.sum()
    if total == 0:
        raise InconsistentMeasurementError("no map explains the measurements")
    with np.errstate(divide="ignore"):
        log_weights = np.log(weights / total).astype(float)
    return JointPosterior(prior.subset, log_weights)


def linear_marginals(joint: JointPosterior) -> np.ndarray:
    """P(b_r = 1) per subset cell by direct summation of exp(log_weights)."""
    probabilities = [math.exp(w) if np.isfinite(w) else 0.0 for w in joint.log_weights]
    total = sum(probabilities)
    marginals = []
    for position in range(joint.n_cells):
        occupied = sum(w for code, w in enumerate(probabilities) if (code >> position) & 1)
        marginals.append(occupied / total)
    return np.asarray(marginals)


def mc_or_gate(b: Sequence[int], bac_row: BacRow, n_samples: int, seed: int) -> float:
    """
    Empirical P(j = 0 | b) from sampling each virtual occupancy and OR-ing them.

    Raises:
        ValueError: For fewer than MIN_MONTE_CARLO_SAMPLES samples
    """
    if n_samples < MIN_MONTE_CARLO_SAMPLES:
        raise ValueError(f"need at least {MIN_MONTE_CARLO_SAMPLES} samples, got {n_samples}")
    b = np.asarray(b, dtype=int).ravel()
    p00 = np.asarray(bac_row.p00, dtype=float).ravel()
    p01 = np.asarray(bac_row.p01, dtype=float).ravel()
    if not b.size == p00.size == p01.size:
        raise ValueError("map and BAC row lengths differ")

    rng = np.random.default_rng(seed)
    # probability that the virtual occupancy reads 1
    p_one = np.where(b == 1, 1.0 - p01, 1.0 - p00)
    virtual = rng.random((n_samples, b.size)) < p_one
    return float(np.mean(~virtual.any(axis=1)))


def point_in_sector(pose: SensorPose, fov: ConeFov, point: Tuple[float, float]) -> bool:
    """Membership of a point in the cone, using the angle between boresight and the point."""
    dx = point[0] - pose.position[0]
    dy = point[1] - pose.position[1]
    r = math.sqrt(dx * dx + dy * dy)
    if r == 0:
        return fov.range_min == 0
    if r < fov.range_min - SECTOR_TOLERANCE or r > fov.range_max + SECTOR_TOLERANCE:
        return False
    cosine = (dx * math.cos(pose.heading) + dy * math.sin(pose.heading)) / r
    angle = math.acos(max(-1.0, min(1.0, cosine)))
    return angle <= fov.beamwidth / 2 + SECTOR_TOLERANCE

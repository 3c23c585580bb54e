"""
Side-looking cone-sensor sweeps over a plan-view grid.

A vehicle moves along a path and pings once per pose. Each range interval
of the cone reads 1 with probability pd when an occupied cell center lies
in that interval's slice of the cone, and with probability pfa otherwise.
"""

import logging
import math
from typing import Optional, Sequence

import numpy as np

from occbac.estimators.state import OccupancyMap, Ping
from occbac.geometry.grid import (
    ConeFov,
    GridSpec,
    SensorPose,
    cell_centers,
    cells_in_cone,
    interval_centers,
    interval_index,
    sample_points,
)
from occbac.scenarios.base import Scenario, VehiclePath, check_probability, substream

logger = logging.getLogger(__name__)

LOOK_OFFSETS = {"starboard": -math.pi / 2, "port": math.pi / 2, "forward": 0.0}


def _look_offset(look: str) -> float:
    if look not in LOOK_OFFSETS:
        raise ValueError(f"look must be one of {sorted(LOOK_OFFSETS)}, got {look!r}")
    return LOOK_OFFSETS[look]


def straight_path(
    start: Sequence[float],
    end: Sequence[float],
    n_pings: int,
    look: str = "starboard",
) -> VehiclePath:
    """
    Evenly spaced poses on a straight track.

    Args:
        start: First ping position (m)
        end: Last ping position (m)
        n_pings: Number of poses
        look: Sensor direction relative to the track
    """
    if n_pings < 1:
        raise ValueError(f"a path needs at least one pose, got {n_pings}")
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    track = math.atan2(end[1] - start[1], end[0] - start[0])
    heading = track + _look_offset(look)
    fractions = np.linspace(0.0, 1.0, n_pings)
    poses = [SensorPose(position=tuple(start + f * (end - start)), heading=heading) for f in fractions]
    spacing = float(np.linalg.norm(end - start)) / (n_pings - 1) if n_pings > 1 else 0.0
    return VehiclePath(poses=tuple(poses), spacing=spacing)


def arc_path(
    center: Sequence[float],
    radius: float,
    start_angle: float,
    end_angle: float,
    n_pings: int,
    look: str = "starboard",
) -> VehiclePath:
    """
    Evenly spaced poses on a circular arc, travelling from ``start_angle`` to ``end_angle``.

    Angles are polar angles (rad) around ``center``.
    """
    if n_pings < 1:
        raise ValueError(f"a path needs at least one pose, got {n_pings}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    direction = 1.0 if end_angle >= start_angle else -1.0
    poses = []
    for angle in np.linspace(start_angle, end_angle, n_pings):
        position = (center[0] + radius * math.cos(angle), center[1] + radius * math.sin(angle))
        track = angle + direction * math.pi / 2
        poses.append(SensorPose(position=position, heading=track + _look_offset(look)))
    spacing = radius * abs(end_angle - start_angle) / (n_pings - 1) if n_pings > 1 else 0.0
    return VehiclePath(poses=tuple(poses), spacing=spacing)


def occupied_intervals(spec: GridSpec, truth: OccupancyMap, pose: SensorPose, fov: ConeFov) -> np.ndarray:
    """Boolean per range interval: does an occupied cell center lie in its slice of the cone?"""
    hit = np.zeros(fov.n_intervals, dtype=bool)
    cells = cells_in_cone(spec, pose, fov)
    occupied = cells[truth.bits[cells] == 1]
    if occupied.size == 0:
        return hit
    delta = cell_centers(spec)[occupied] - np.asarray(pose.position, dtype=float)
    for distance in np.hypot(delta[:, 0], delta[:, 1]):
        hit[interval_index(fov, float(distance))] = True
    return hit


def generate_cone_sweep(
    spec: GridSpec,
    truth: OccupancyMap,
    path: VehiclePath,
    fov: ConeFov,
    pd: float = 0.8,
    pfa: float = 0.08,
    alpha: Optional[float] = None,
    seed: int = 0,
) -> Scenario:
    """
    Simulate thresholded detections along a vehicle path.

    Args:
        spec: Grid geometry
        truth: True map
        path: One pose per ping
        fov: Sensor cone
        pd: Detection probability of an interval holding an occupied cell
        pfa: False-alarm probability of an empty interval
        alpha: When set, pd at centerline distance d is scaled by (1 + d)^-alpha
        seed: Seed; ping ``s`` draws from substream ``(s,)``

    Raises:
        ValueError: For an empty path, probabilities outside [0, 1] or alpha < 0
    """
    check_probability("pd", pd)
    check_probability("pfa", pfa)
    if len(path) == 0:
        raise ValueError("path has no poses")
    if alpha is not None and alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    if len(truth) != spec.n_cells:
        raise ValueError(f"truth has {len(truth)} cells, grid has {spec.n_cells}")

    pd_eff = np.full(fov.n_intervals, pd)
    if alpha is not None:
        pd_eff = pd * (1.0 + interval_centers(fov)) ** (-alpha)

    pings = []
    detections = 0
    for s, pose in enumerate(path.poses):
        hit = occupied_intervals(spec, truth, pose, fov)
        draws = substream(seed, s).random(fov.n_intervals)
        j = (draws < np.where(hit, pd_eff, pfa)).astype(np.uint8)
        detections += int(j.sum())
        pings.append(Ping(s=s, j=j, sample_locations=sample_points(pose, fov), pose=pose, fov=fov))

    if detections == 0 and truth.n_occupied:
        logger.warning(f"Cone sweep produced no detection over {len(path)} pings")
    logger.debug(f"Generated cone sweep: {len(path)} pings, K={fov.n_intervals}, seed={seed}")
    return Scenario(
        kind="cone_sweep",
        spec=spec,
        truth=truth,
        pings=pings,
        seed=seed,
        parameters={"pd": pd, "pfa": pfa, "alpha": alpha},
        fov=fov,
        path=path,
    )

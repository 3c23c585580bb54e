"""
Plan-view grid geometry.

Cells are square and indexed row-major: cell ``i`` sits at row
``i // n_x`` (along +y) and column ``i % n_x`` (along +x). Every membership
test in this module is decided by the cell's center point.
"""

import logging
import math
from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

logger = logging.getLogger(__name__)

# Inclusive tolerance for boundary tests (angles in radians, ranges in meters).
BOUNDARY_TOLERANCE = 1e-12

Point = Tuple[float, float]


class GridSpec(BaseModel):
    """Geometry of a 2D occupancy grid."""

    model_config = ConfigDict(frozen=True)

    origin: Tuple[float, float] = Field((0.0, 0.0), description="World position of the grid corner (m)")
    cell_size: float = Field(..., gt=0, description="Side length of a square cell (m)")
    n_x: int = Field(..., ge=1, description="Number of columns")
    n_y: int = Field(..., ge=1, description="Number of rows")

    @property
    def n_cells(self) -> int:
        """Total number of cells B."""
        return self.n_x * self.n_y

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max) of the grid in world coordinates."""
        x0, y0 = self.origin
        return x0, y0, x0 + self.n_x * self.cell_size, y0 + self.n_y * self.cell_size


class SensorPose(BaseModel):
    """Sensor position and heading; heading is normalized to (-pi, pi]."""

    model_config = ConfigDict(frozen=True)

    position: Tuple[float, float] = Field(..., description="Sensor position (m)")
    heading: float = Field(0.0, description="Boresight direction (rad)")

    @field_validator("heading")
    @classmethod
    def _normalize_heading(cls, value: float) -> float:
        if -math.pi < value <= math.pi:
            return float(value)
        wrapped = math.atan2(math.sin(value), math.cos(value))
        if wrapped <= -math.pi:
            wrapped += 2 * math.pi
        return wrapped

    @property
    def direction(self) -> np.ndarray:
        """Unit vector along the heading."""
        return np.array([math.cos(self.heading), math.sin(self.heading)])


class ConeFov(BaseModel):
    """Horizontal field of view of a cone sensor, split into K range intervals."""

    model_config = ConfigDict(frozen=True)

    beamwidth: float = Field(..., gt=0, lt=math.pi, description="Horizontal beamwidth theta (rad)")
    range_min: float = Field(0.0, ge=0, description="Closest observed range (m)")
    range_max: float = Field(..., gt=0, description="Farthest observed range (m)")
    n_intervals: int = Field(..., ge=1, description="Number of range intervals K")

    @model_validator(mode="after")
    def _check_ranges(self) -> "ConeFov":
        if not self.range_min < self.range_max:
            raise ValueError(f"range_min ({self.range_min}) must be below range_max ({self.range_max})")
        return self

    @property
    def interval_width(self) -> float:
        return (self.range_max - self.range_min) / self.n_intervals


class RangeGate(BaseModel):
    """A radial band of a cone: a contiguous window of measurement indices and its cells."""

    model_config = ConfigDict(frozen=True)

    measurement_indices: Tuple[int, ...] = Field(..., description="Contiguous window kappa")
    cell_indices: Tuple[int, ...] = Field((), description="Cells whose centers fall in the band")
    band: Tuple[float, float] = Field(..., description="Radial extent (m)")

    @field_validator("measurement_indices")
    @classmethod
    def _check_window(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value:
            raise ValueError("range gate needs at least one measurement index")
        if list(value) != list(range(value[0], value[0] + len(value))):
            raise ValueError(f"measurement window must be contiguous, got {value}")
        return value


def cell_centers(spec: GridSpec) -> np.ndarray:
    """World-space centers of all cells, shape (B, 2), row-major order."""
    x0, y0 = spec.origin
    cols = np.arange(spec.n_x)
    rows = np.arange(spec.n_y)
    xs = x0 + (cols + 0.5) * spec.cell_size
    ys = y0 + (rows + 0.5) * spec.cell_size
    grid_x, grid_y = np.meshgrid(xs, ys)
    return np.column_stack([grid_x.ravel(), grid_y.ravel()])


def cell_center(spec: GridSpec, i: int) -> Point:
    """
    World-space center of cell ``i``.

    Raises:
        IndexError: When ``i`` is outside [0, B)
    """
    if not 0 <= i < spec.n_cells:
        raise IndexError(f"cell index {i} outside [0, {spec.n_cells})")
    row, col = divmod(int(i), spec.n_x)
    x0, y0 = spec.origin
    return (x0 + (col + 0.5) * spec.cell_size, y0 + (row + 0.5) * spec.cell_size)


def cell_index(spec: GridSpec, point: Sequence[float]) -> int:
    """
    Index of the cell containing ``point``.

    Raises:
        ValueError: When the point lies outside the grid
    """
    x0, y0 = spec.origin
    col = math.floor((point[0] - x0) / spec.cell_size)
    row = math.floor((point[1] - y0) / spec.cell_size)
    if not (0 <= col < spec.n_x and 0 <= row < spec.n_y):
        raise ValueError(f"point {tuple(point)} lies outside the grid")
    return row * spec.n_x + col


def _bearing_offsets(pose: SensorPose, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Radial distance and absolute angular offset from the heading for each point."""
    delta = np.asarray(points, dtype=float).reshape(-1, 2) - np.asarray(pose.position, dtype=float)
    distance = np.hypot(delta[:, 0], delta[:, 1])
    bearing = np.arctan2(delta[:, 1], delta[:, 0]) - pose.heading
    offset = np.abs(np.arctan2(np.sin(bearing), np.cos(bearing)))
    return distance, offset


def _in_sector(distance: np.ndarray, offset: np.ndarray, fov: ConeFov) -> np.ndarray:
    half = fov.beamwidth / 2
    inside = (
        (offset <= half + BOUNDARY_TOLERANCE)
        & (distance >= fov.range_min - BOUNDARY_TOLERANCE)
        & (distance <= fov.range_max + BOUNDARY_TOLERANCE)
    )
    # A center on the sensor itself has no bearing.
    at_sensor = distance == 0
    inside[at_sensor] = fov.range_min == 0
    return inside


def cells_in_cone(spec: GridSpec, pose: SensorPose, fov: ConeFov) -> np.ndarray:
    """
    Cells whose centers lie inside the sensor cone (the set I), ascending.

    The complement within ``range(B)`` is the set O of unobserved cells.
    """
    distance, offset = _bearing_offsets(pose, cell_centers(spec))
    inside = np.flatnonzero(_in_sector(distance, offset, fov))
    if inside.size == 0:
        logger.debug(f"Empty cone at pose {pose.position}, heading {pose.heading:.4f}")
    return inside


def interval_centers(fov: ConeFov) -> np.ndarray:
    """Centerline distance of each measurement index k."""
    k = np.arange(fov.n_intervals)
    return fov.range_min + (k + 0.5) * fov.interval_width


def interval_index(fov: ConeFov, distance: float) -> int:
    """Measurement index whose range interval contains ``distance`` (clamped to [0, K))."""
    k = math.floor((distance - fov.range_min) / fov.interval_width)
    return min(max(k, 0), fov.n_intervals - 1)


def sample_points(pose: SensorPose, fov: ConeFov) -> np.ndarray:
    """World positions of the K centerline samples of a ping, shape (K, 2)."""
    return np.asarray(pose.position, dtype=float) + np.outer(interval_centers(fov), pose.direction)


def project_onto_centerline(pose: SensorPose, fov: ConeFov, points: Sequence[Sequence[float]]) -> np.ndarray:
    """Distance along the heading ray of each point's orthogonal projection."""
    delta = np.asarray(points, dtype=float).reshape(-1, 2) - np.asarray(pose.position, dtype=float)
    return delta @ pose.direction


def _gate_bands(fov: ConeFov, gate_count: int, overlap_fraction: float) -> List[Tuple[float, float]]:
    span = fov.range_max - fov.range_min
    width = span / (1 + (gate_count - 1) * (1 - overlap_fraction))
    stride = width * (1 - overlap_fraction)
    bands = []
    for g in range(gate_count):
        lo = fov.range_min + g * stride
        if g == gate_count - 1:
            hi = fov.range_max
        elif overlap_fraction == 0:
            # same expression as the next band's lower edge
            hi = fov.range_min + (g + 1) * stride
        else:
            hi = lo + width
        bands.append((lo, hi))
    return bands


def _in_band(values: np.ndarray, band: Tuple[float, float], closed: bool) -> np.ndarray:
    lo, hi = band
    upper = values <= hi if closed else values < hi
    return (values >= lo) & upper


def make_range_gates(
    spec: GridSpec,
    cells: Sequence[int],
    pose: SensorPose,
    fov: ConeFov,
    gate_count: int,
    overlap_fraction: float = 0.0,
) -> List[RangeGate]:
    """
    Split a cone into equal-width radial bands.

    Consecutive bands share ``overlap_fraction`` of their width. A measurement
    index belongs to every band holding its interval center; a cell belongs
    to every band holding its center distance. Bands are half-open except
    the last, so with zero overlap both windows and cell sets are disjoint.

    Args:
        spec: Grid geometry
        cells: Observed cells (normally ``cells_in_cone``)
        pose: Sensor pose of the ping
        fov: Cone of the ping
        gate_count: Number of gates, 1 <= gate_count <= K
        overlap_fraction: Fraction of a band shared with its neighbor, in [0, 1)

    Returns:
        Gates in ascending range order

    Raises:
        ValueError: For gate_count outside [1, K] or overlap outside [0, 1)
    """
    if gate_count < 1:
        raise ValueError(f"gate_count must be at least 1, got {gate_count}")
    if gate_count > fov.n_intervals:
        raise ValueError(f"gate_count {gate_count} exceeds the number of range intervals {fov.n_intervals}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise ValueError(f"overlap_fraction must lie in [0, 1), got {overlap_fraction}")

    cells = np.asarray(sorted(int(c) for c in cells), dtype=int)
    centers = interval_centers(fov)
    if cells.size:
        cell_distance, _ = _bearing_offsets(pose, cell_centers(spec)[cells])
    else:
        cell_distance = np.empty(0)

    gates = []
    bands = _gate_bands(fov, gate_count, overlap_fraction)
    for g, band in enumerate(bands):
        closed = g == gate_count - 1
        window = np.flatnonzero(_in_band(centers, band, closed))
        members = cells[_in_band(cell_distance, band, closed)] if cells.size else cells
        gates.append(
            RangeGate(
                measurement_indices=tuple(int(k) for k in window),
                cell_indices=tuple(int(c) for c in members),
                band=band,
            )
        )
    return gates

"""
Lattice toy problem and truth-map builders.

Every cell is observed at every ping through a square lattice of samples
placed inside it; an occupied cell's samples read 1 with probability pd,
an empty cell's with probability pfa.
"""

import logging
import math
from typing import Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from occbac.estimators.state import OccupancyMap, Ping
from occbac.geometry.grid import GridSpec, cell_centers
from occbac.scenarios.base import Scenario, check_probability, substream
from occbac.utils.errors import CapacityError

logger = logging.getLogger(__name__)

TOY_GRID = GridSpec(cell_size=0.5, n_x=4, n_y=4)
ENUMERATION_LIMIT = 24

Rectangle = Tuple[Tuple[float, float], Tuple[float, float]]


def checkerboard_truth(spec: GridSpec = TOY_GRID, phase: int = 0) -> OccupancyMap:
    """Alternating map; cell 0 is occupied for ``phase`` 0."""
    rows, cols = np.divmod(np.arange(spec.n_cells), spec.n_x)
    return OccupancyMap(((rows + cols + phase) % 2 == 0).astype(np.uint8))


def random_truth(
    spec: GridSpec,
    rng: Union[int, np.random.Generator],
    p_occupied: float = 0.5,
) -> OccupancyMap:
    """Each cell occupied independently with probability ``p_occupied``."""
    check_probability("p_occupied", p_occupied)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    return OccupancyMap((rng.random(spec.n_cells) < p_occupied).astype(np.uint8))


def rectangles_truth(spec: GridSpec, rectangles: Sequence[Rectangle]) -> OccupancyMap:
    """Cells whose centers fall inside any of the axis-aligned rectangles (corners inclusive)."""
    centers = cell_centers(spec)
    occupied = np.zeros(spec.n_cells, dtype=bool)
    for (x0, y0), (x1, y1) in rectangles:
        lo_x, hi_x = sorted((x0, x1))
        lo_y, hi_y = sorted((y0, y1))
        occupied |= (
            (centers[:, 0] >= lo_x) & (centers[:, 0] <= hi_x) & (centers[:, 1] >= lo_y) & (centers[:, 1] <= hi_y)
        )
    return OccupancyMap(occupied.astype(np.uint8))


def enumerate_all_truths(spec: GridSpec) -> Iterator[OccupancyMap]:
    """
    Every map of the grid in ascending integer encoding.

    Raises:
        CapacityError: For grids over ENUMERATION_LIMIT cells
    """
    if spec.n_cells > ENUMERATION_LIMIT:
        raise CapacityError(f"cannot enumerate 2^{spec.n_cells} maps (limit {ENUMERATION_LIMIT} cells)")
    for code in range(1 << spec.n_cells):
        yield OccupancyMap.from_code(code, spec.n_cells)


def lattice_samples(spec: GridSpec, samples_per_cell: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sample positions and owning cells of the toy lattice.

    Samples form an m x m grid inside each cell (m^2 = ``samples_per_cell``)
    and are ordered cell by cell, row-major within a cell.

    Raises:
        ValueError: When ``samples_per_cell`` is not a positive square
    """
    m = math.isqrt(samples_per_cell) if samples_per_cell > 0 else 0
    if m < 1 or m * m != samples_per_cell:
        raise ValueError(f"samples_per_cell must be a positive square, got {samples_per_cell}")
    offsets = (np.arange(m) + 0.5) / m * spec.cell_size - spec.cell_size / 2
    off_x, off_y = np.meshgrid(offsets, offsets)
    pattern = np.column_stack([off_x.ravel(), off_y.ravel()])
    centers = cell_centers(spec)
    locations = (centers[:, None, :] + pattern[None, :, :]).reshape(-1, 2)
    owners = np.repeat(np.arange(spec.n_cells), samples_per_cell)
    return locations, owners


def generate_toy(
    truth: OccupancyMap,
    pd: float = 0.8,
    pfa: float = 0.08,
    n_pings: int = 15,
    samples_per_cell: int = 9,
    seed: int = 0,
    spec: Optional[GridSpec] = None,
) -> Scenario:
    """
    Toy scenario: ideal lattice measurements passed through a BAC.

    Args:
        truth: True map over ``spec``
        pd: Probability an occupied cell's sample reads 1
        pfa: Probability an empty cell's sample reads 1
        n_pings: Number of pings S
        samples_per_cell: Lattice samples per cell (a square number)
        seed: Seed; ping ``s`` draws from substream ``(s,)``
        spec: Grid geometry, the 4 x 4 toy grid of 0.5 m cells by default

    Raises:
        ValueError: For probabilities outside [0, 1], no pings or a truth of the wrong size
    """
    spec = spec or TOY_GRID
    check_probability("pd", pd)
    check_probability("pfa", pfa)
    if n_pings < 1:
        raise ValueError(f"at least one ping is required, got {n_pings}")
    if len(truth) != spec.n_cells:
        raise ValueError(f"truth has {len(truth)} cells, grid has {spec.n_cells}")

    locations, owners = lattice_samples(spec, samples_per_cell)
    ideal = truth.bits[owners]
    p_one = np.where(ideal == 1, pd, pfa)

    pings = []
    for s in range(n_pings):
        draws = substream(seed, s).random(ideal.size)
        pings.append(Ping(s=s, j=(draws < p_one).astype(np.uint8), sample_locations=locations, sample_cells=owners))

    logger.debug(f"Generated toy scenario: {n_pings} pings, K={ideal.size}, seed={seed}")
    return Scenario(
        kind="toy",
        spec=spec,
        truth=truth,
        pings=pings,
        seed=seed,
        parameters={"pd": pd, "pfa": pfa, "n_pings": n_pings, "samples_per_cell": samples_per_cell},
    )

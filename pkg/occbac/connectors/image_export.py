"""
Occupancy-grid images as binary 8-bit portable graymaps.

Darker pixels mean higher occupancy: value = floor(255 (1 - p) + 0.5).
Grid row 0 (lowest y) is the bottom of the image.
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image

from occbac.estimators.state import MarginalField, OccupancyMap
from occbac.geometry.grid import GridSpec
from occbac.utils.io import PathLike, atomic_write

logger = logging.getLogger(__name__)

DEFAULT_PIXELS_PER_CELL = 8


def grid_pixels(field: Union[MarginalField, OccupancyMap], spec: GridSpec, pixels_per_cell: int = 1) -> np.ndarray:
    """(n_y * ppc, n_x * ppc) uint8 image array of a field."""
    probs = field.probs if isinstance(field, MarginalField) else field.bits.astype(float)
    if probs.size != spec.n_cells:
        raise ValueError(f"field has {probs.size} cells, grid has {spec.n_cells}")
    if pixels_per_cell < 1:
        raise ValueError(f"pixels_per_cell must be at least 1, got {pixels_per_cell}")
    values = np.floor(255.0 * (1.0 - probs) + 0.5).clip(0, 255).astype(np.uint8)
    image = np.flipud(values.reshape(spec.n_y, spec.n_x))
    return np.kron(image, np.ones((pixels_per_cell, pixels_per_cell), dtype=np.uint8))


def export_grid_image(
    field: Union[MarginalField, OccupancyMap],
    spec: GridSpec,
    path: PathLike,
    pixels_per_cell: int = DEFAULT_PIXELS_PER_CELL,
) -> Path:
    """
    Write a field as a binary PGM (P5, maxval 255), atomically.

    Args:
        field: Marginal field or truth map
        spec: Grid geometry
        path: Destination file
        pixels_per_cell: Side of the square pixel block drawn per cell

    Returns:
        The written path
    """
    image = Image.fromarray(grid_pixels(field, spec, pixels_per_cell))
    target = atomic_write(path, lambda tmp: image.save(tmp, format="PPM"))
    logger.info(f"Saved occupancy image to {target}")
    return target

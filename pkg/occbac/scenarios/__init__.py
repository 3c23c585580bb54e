"""Synthetic scenarios: the lattice toy problem and cone-sensor sweeps."""

from occbac.scenarios.base import Scenario, VehiclePath, derive_seed, substream
from occbac.scenarios.sonar import arc_path, generate_cone_sweep, occupied_intervals, straight_path
from occbac.scenarios.toy import (
    TOY_GRID,
    checkerboard_truth,
    enumerate_all_truths,
    generate_toy,
    lattice_samples,
    random_truth,
    rectangles_truth,
)

__all__ = [
    "Scenario",
    "VehiclePath",
    "derive_seed",
    "substream",
    "arc_path",
    "generate_cone_sweep",
    "occupied_intervals",
    "straight_path",
    "TOY_GRID",
    "checkerboard_truth",
    "enumerate_all_truths",
    "generate_toy",
    "lattice_samples",
    "random_truth",
    "rectangles_truth",
]

"""Grid geometry, sensor cones and range gates."""

from occbac.geometry.grid import (
    ConeFov,
    GridSpec,
    RangeGate,
    SensorPose,
    cell_center,
    cell_centers,
    cell_index,
    cells_in_cone,
    interval_centers,
    interval_index,
    make_range_gates,
    project_onto_centerline,
    sample_points,
)

__all__ = [
    "GridSpec",
    "SensorPose",
    "ConeFov",
    "RangeGate",
    "cell_center",
    "cell_centers",
    "cell_index",
    "cells_in_cone",
    "interval_centers",
    "interval_index",
    "make_range_gates",
    "project_onto_centerline",
    "sample_points",
]

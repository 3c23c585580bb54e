"""File connectors: scenario/field text files and occupancy images."""

from occbac.connectors.image_export import export_grid_image, grid_pixels
from occbac.connectors.scenario_file import (
    format_scenario,
    load_field,
    load_scenario,
    parse_field,
    parse_scenario,
    save_field,
    save_scenario,
)

__all__ = [
    "export_grid_image",
    "grid_pixels",
    "format_scenario",
    "load_field",
    "load_scenario",
    "parse_field",
    "parse_scenario",
    "save_field",
    "save_scenario",
]

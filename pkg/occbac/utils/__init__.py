"""Utility functions and helpers."""

from occbac.utils.errors import (
    CapacityError,
    ConfigError,
    InconsistentMeasurementError,
    OccbacError,
    ScenarioFormatError,
    SelfCheckError,
)
from occbac.utils.io import atomic_write_text, format_number

__all__ = [
    "OccbacError",
    "ConfigError",
    "CapacityError",
    "InconsistentMeasurementError",
    "ScenarioFormatError",
    "SelfCheckError",
    "atomic_write_text",
    "format_number",
]

"""Binary asymmetric channel (BAC) sensor model with OR-gate measurements."""

from occbac.channel.bac import (
    BacEntry,
    BacRow,
    BacTable,
    IdealSensorModel,
    OrGateLikelihood,
    TransitionModel,
    TransitionVariant,
    VARIANT_ALIASES,
    build_bac_table,
    classify_cells,
    configuration_bits,
    ideal_sensor_bac,
    ideal_sensor_profile,
    or_gate_zero_likelihood,
    ping_log_likelihood,
    range_to_measurement,
    transition_entry,
    transition_matrices,
)

__all__ = [
    "BacEntry",
    "BacRow",
    "BacTable",
    "IdealSensorModel",
    "OrGateLikelihood",
    "TransitionModel",
    "TransitionVariant",
    "VARIANT_ALIASES",
    "build_bac_table",
    "classify_cells",
    "configuration_bits",
    "ideal_sensor_bac",
    "ideal_sensor_profile",
    "or_gate_zero_likelihood",
    "ping_log_likelihood",
    "range_to_measurement",
    "transition_entry",
    "transition_matrices",
]

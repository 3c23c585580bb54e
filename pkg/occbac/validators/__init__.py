"""Evaluation metrics, brute-force oracles and the self-check suite."""

from occbac.validators.metrics import (
    MetricsReport,
    detection_map,
    error_sweep,
    evaluate,
    gamma_grid,
    similarity_rho,
    sjsd,
    summarize,
)
from occbac.validators.oracle import batch_posterior, linear_marginals, mc_or_gate, point_in_sector
from occbac.validators.selfcheck import CheckResult, allowed_exceedances, or_gate_exceedances, run_selfcheck

__all__ = [
    "MetricsReport",
    "detection_map",
    "error_sweep",
    "evaluate",
    "gamma_grid",
    "similarity_rho",
    "sjsd",
    "summarize",
    "batch_posterior",
    "linear_marginals",
    "mc_or_gate",
    "point_in_sector",
    "CheckResult",
    "allowed_exceedances",
    "or_gate_exceedances",
    "run_selfcheck",
]

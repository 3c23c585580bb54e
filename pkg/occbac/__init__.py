"""
Occupancy grids with dependent cells (occbac)
=============================================

Bayesian occupancy-grid estimation where every measurement sample is the OR
of binary asymmetric channels fed by all cells. Includes the exact joint
posterior, its cone-only and range-gate reductions, two independence
baselines, scenario simulators, metrics and a config-driven experiment
runner.

Basic Usage:
    >>> from occbac import ExperimentOrchestrator
    >>> orchestrator = ExperimentOrchestrator("configs/toy_table.yaml")
    >>> orchestrator.run()

Main Components:
    - geometry: grid cells, sensor cones and range gates
    - channel: BAC transition probabilities and OR-gate likelihoods
    - estimators: GF, CO, RGO, IM and CM
    - scenarios: toy lattice problem and cone-sensor sweeps
    - validators: metrics, oracles and the self-check suite
    - ExperimentOrchestrator: runs trials and writes the artifacts
"""

__version__ = "0.1.0"
__license__ = "Apache-2.0"

from occbac.estimators import EstimatorSettings, MarginalField, MethodTag, OccupancyMap, run_sequence
from occbac.geometry import ConeFov, GridSpec, SensorPose
from occbac.orchestrator.experiment import ExperimentConfig, ExperimentOrchestrator

__all__ = [
    "ConeFov",
    "EstimatorSettings",
    "ExperimentConfig",
    "ExperimentOrchestrator",
    "GridSpec",
    "MarginalField",
    "MethodTag",
    "OccupancyMap",
    "SensorPose",
    "run_sequence",
    "__version__",
]

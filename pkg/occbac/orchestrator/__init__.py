"""Experiment orchestration engine."""

from occbac.orchestrator.experiment import (
    ExperimentConfig,
    ExperimentOrchestrator,
    TrialResult,
    build_scenario,
    run_trial,
)

__all__ = ["ExperimentConfig", "ExperimentOrchestrator", "TrialResult", "build_scenario", "run_trial"]

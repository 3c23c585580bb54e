"""
Occupancy estimators: exact joint posterior, its cone and range-gate
reductions, and the two independence baselines.
"""

from occbac.estimators.base_estimator import BaseEstimator, EstimatorSettings, MethodTag, Trajectory
from occbac.estimators.cone import (
    ConeOnlyEstimator,
    RangeGateEstimator,
    co_update,
    rgo_update,
    section_gates,
)
from occbac.estimators.general import (
    GeneralFormulationEstimator,
    LikelihoodCache,
    apply_measurement,
    gf_marginal,
    gf_marginals,
    gf_update,
)
from occbac.estimators.independence import (
    CmParams,
    ConventionalEstimator,
    IndependenceEstimator,
    associate_measurements,
    cm_update,
    im_update,
    log_odds_to_field,
)
from occbac.estimators.sequence import ESTIMATORS, create_estimator, run_sequence
from occbac.estimators.state import (
    DEFAULT_SUBSET_CAP,
    JointPosterior,
    MarginalField,
    OccupancyMap,
    Ping,
    check_subset_size,
)

__all__ = [
    "BaseEstimator",
    "EstimatorSettings",
    "MethodTag",
    "Trajectory",
    "ConeOnlyEstimator",
    "RangeGateEstimator",
    "co_update",
    "rgo_update",
    "section_gates",
    "GeneralFormulationEstimator",
    "LikelihoodCache",
    "apply_measurement",
    "gf_marginal",
    "gf_marginals",
    "gf_update",
    "CmParams",
    "ConventionalEstimator",
    "IndependenceEstimator",
    "associate_measurements",
    "cm_update",
    "im_update",
    "log_odds_to_field",
    "ESTIMATORS",
    "create_estimator",
    "run_sequence",
    "DEFAULT_SUBSET_CAP",
    "JointPosterior",
    "MarginalField",
    "OccupancyMap",
    "Ping",
    "check_subset_size",
]

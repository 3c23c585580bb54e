"""
Estimator registry and the per-scenario ping loop.
"""

import logging
from typing import Dict, Iterable, Optional, Type

from occbac.estimators.base_estimator import BaseEstimator, EstimatorSettings, MethodTag, Trajectory
from occbac.estimators.cone import ConeOnlyEstimator, RangeGateEstimator
from occbac.estimators.general import GeneralFormulationEstimator
from occbac.estimators.independence import ConventionalEstimator, IndependenceEstimator
from occbac.estimators.state import Ping
from occbac.geometry.grid import GridSpec

logger = logging.getLogger(__name__)

ESTIMATORS: Dict[MethodTag, Type[BaseEstimator]] = {
    MethodTag.GF: GeneralFormulationEstimator,
    MethodTag.CO: ConeOnlyEstimator,
    MethodTag.RGO: RangeGateEstimator,
    MethodTag.IM: IndependenceEstimator,
    MethodTag.CM: ConventionalEstimator,
}


def create_estimator(spec: GridSpec, settings: EstimatorSettings) -> BaseEstimator:
    """
    Instantiate the estimator class registered for ``settings.method``.

    Raises:
        ValueError: For an unknown method tag
        CapacityError: When the method cannot hold the grid (GF over the cap)
    """
    estimator_class = ESTIMATORS.get(MethodTag(settings.method))
    if estimator_class is None:
        raise ValueError(f"Unknown estimation method: {settings.method}")
    return estimator_class(spec, settings)


def run_sequence(
    method: MethodTag,
    pings: Iterable[Ping],
    spec: GridSpec,
    settings: Optional[EstimatorSettings] = None,
) -> Trajectory:
    """
    Run one method over an ordered ping sequence.

    Args:
        method: Method tag (GF, CO, RGO, IM or CM)
        pings: Scenario pings in time order
        spec: Grid geometry
        settings: Method parameters; defaults for ``method`` when omitted

    Returns:
        Trajectory with one marginal field per ping
    """
    method = MethodTag(method)
    if settings is None:
        settings = EstimatorSettings(method=method)
    elif settings.method != method:
        update = {"method": method}
        if settings.label == settings.method.value:
            update["label"] = method.value
        settings = settings.model_copy(update=update)
    estimator = create_estimator(spec, settings)
    try:
        return estimator.run(pings)
    except Exception as e:
        logger.error(f"{settings.label} failed: {e}")
        raise

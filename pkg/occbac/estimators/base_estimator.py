"""
Base estimator class.

Every estimation method (GF, CO, RGO, IM, CM) is a subclass that knows how
to build its initial state, fold one ping into it and report marginals.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from occbac.channel.bac import TransitionModel
from occbac.estimators.state import DEFAULT_SUBSET_CAP, MarginalField, Ping
from occbac.geometry.grid import GridSpec

logger = logging.getLogger(__name__)


class MethodTag(str, Enum):
    """Estimation method identifiers."""

    GF = "GF"
    CO = "CO"
    RGO = "RGO"
    IM = "IM"
    CM = "CM"


class EstimatorSettings(BaseModel):
    """Per-method parameters, as found in the ``estimators`` config section."""

    model_config = ConfigDict(frozen=True)

    method: MethodTag = Field(..., description="Estimation method")
    label: Optional[str] = Field(None, description="Name used in outputs (defaults to the method tag)")
    transition: TransitionModel = Field(default_factory=TransitionModel, description="BAC transition model")
    subset_cap: int = Field(DEFAULT_SUBSET_CAP, ge=1, le=26, description="Largest joint subset")
    gate_count: int = Field(1, ge=1, description="Range gates per cone (RGO)")
    overlap: float = Field(0.0, ge=0, lt=1, description="Fractional overlap of consecutive gates (RGO)")
    sections: int = Field(2, ge=1, description="Row sections of a lattice grid (RGO without a cone)")
    neighborhood: Optional[float] = Field(
        None, ge=0, description="Centerline radius of a cell's measurement set (IM/CM); None = own interval"
    )
    p_hit: float = Field(0.7, gt=0.5, lt=1, description="Inverse-model occupancy after a hit (CM)")
    p_miss: float = Field(0.4, gt=0, lt=0.5, description="Inverse-model occupancy after a miss (CM)")

    @field_validator("method", mode="before")
    @classmethod
    def _upper_method(cls, value: Any) -> Any:
        return value.upper() if isinstance(value, str) else value

    @model_validator(mode="before")
    @classmethod
    def _default_label(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("label") is None and data.get("method") is not None:
            method = data["method"]
            data = {**data, "label": method.value if isinstance(method, MethodTag) else str(method).upper()}
        return data


@dataclass
class Trajectory:
    """Marginal field after every ping."""

    n_cells: int
    snapshots: List[MarginalField] = field(default_factory=list)

    @property
    def final(self) -> MarginalField:
        """Last snapshot, or the uniform prior when no ping was processed."""
        return self.snapshots[-1] if self.snapshots else MarginalField.uniform(self.n_cells)

    def __len__(self) -> int:
        return len(self.snapshots)


class BaseEstimator(ABC):
    """
    Base class for all occupancy estimators.

    Args:
        spec: Grid geometry
        settings: Method parameters
    """

    method: MethodTag

    def __init__(self, spec: GridSpec, settings: EstimatorSettings):
        self.spec = spec
        self.settings = settings
        self.name = settings.label
        logger.info(f"Initialized {self.name} estimator ({self.method.value}) on {spec.n_cells} cells")

    @abstractmethod
    def initial_state(self) -> Any:
        """State before any ping (uniform 0.5 occupancy)."""
        pass

    @abstractmethod
    def update(self, state: Any, ping: Ping) -> Any:
        """
        Fold one ping into the state.

        Args:
            state: Output of ``initial_state`` or a previous ``update``
            ping: Measurement of the current time step

        Returns:
            The new state; the input is left untouched
        """
        pass

    @abstractmethod
    def marginals(self, state: Any) -> MarginalField:
        """Per-cell occupancy probabilities of a state."""
        pass

    def run(self, pings: Iterable[Ping]) -> Trajectory:
        """
        Process pings in order.

        Returns:
            Trajectory holding one marginal field per ping
        """
        trajectory = Trajectory(self.spec.n_cells)
        state = self.initial_state()
        for ping in pings:
            state = self.update(state, ping)
            trajectory.snapshots.append(self.marginals(state))
            logger.debug(f"{self.name}: processed ping {ping.s}")
        logger.info(f"{self.name}: processed {len(trajectory)} pings")
        return trajectory

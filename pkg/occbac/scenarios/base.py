"""
Scenario containers and seeding helpers shared by the generators.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from occbac.estimators.state import OccupancyMap, Ping
from occbac.geometry.grid import ConeFov, GridSpec, SensorPose

logger = logging.getLogger(__name__)


def substream(seed: int, *counters: int) -> np.random.Generator:
    """Independent PCG64 generator for the given counters under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(c) for c in counters)))


def derive_seed(seed: int, *counters: int) -> int:
    """64-bit seed of a sub-experiment (e.g. one trial) derived from ``seed``."""
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(c) for c in counters))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def check_probability(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return float(value)


@dataclass(frozen=True)
class VehiclePath:
    """Sensor poses of consecutive pings."""

    poses: Tuple[SensorPose, ...]
    spacing: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "poses", tuple(self.poses))

    def __len__(self) -> int:
        return len(self.poses)


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    Truth map plus the ordered pings observed over it.

    Args:
        kind: Generator name ("toy", "cone_sweep" or "file")
        spec: Grid geometry
        truth: True occupancy map
        pings: Measurements in time order
        seed: Seed the pings were drawn with
        parameters: Generator parameters (pd, pfa, alpha, ...)
        fov: Sensor cone shared by all pings (cone scenarios)
        path: Vehicle path (cone scenarios)
    """

    kind: str
    spec: GridSpec
    truth: OccupancyMap
    pings: Tuple[Ping, ...]
    seed: int
    parameters: Dict[str, Any] = field(default_factory=dict)
    fov: Optional[ConeFov] = None
    path: Optional[VehiclePath] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "pings", tuple(self.pings))
        if len(self.truth) != self.spec.n_cells:
            raise ValueError(f"truth has {len(self.truth)} cells, grid has {self.spec.n_cells}")
        if self.path is not None and len(self.path) != len(self.pings):
            raise ValueError(f"path has {len(self.path)} poses for {len(self.pings)} pings")

    @property
    def n_pings(self) -> int:
        return len(self.pings)

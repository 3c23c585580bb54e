"""
Estimator state: maps, joint posteriors, marginal fields and pings.

A configuration of an ordered cell subset is encoded as the integer whose
bit ``i`` is the occupancy of ``subset[i]``; joint tables are indexed by it.
"""

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from occbac.channel.bac import configuration_bits
from occbac.geometry.grid import ConeFov, SensorPose
from occbac.utils.errors import CapacityError

DEFAULT_SUBSET_CAP = 20
NORMALIZATION_TOLERANCE = 1e-9


def _frozen(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class OccupancyMap:
    """Binary occupancy vector b (a "map")."""

    bits: np.ndarray

    def __post_init__(self) -> None:
        bits = _frozen(np.asarray(self.bits).ravel(), np.uint8)
        if np.any(bits > 1):
            raise ValueError("occupancy entries must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_code(cls, code: int, n_cells: int) -> "OccupancyMap":
        if not 0 <= code < (1 << n_cells):
            raise ValueError(f"code {code} does not fit {n_cells} cells")
        return cls(np.array([(code >> i) & 1 for i in range(n_cells)], dtype=np.uint8))

    @property
    def code(self) -> int:
        return int(sum(int(b) << i for i, b in enumerate(self.bits)))

    @property
    def n_occupied(self) -> int:
        return int(self.bits.sum())

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, OccupancyMap) and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())


@dataclass(frozen=True, eq=False)
class MarginalField:
    """Per-cell posterior occupancy probabilities p."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = _frozen(np.asarray(self.probs, dtype=float).ravel(), float)
        if np.any(np.isnan(probs)) or np.any(probs < 0) or np.any(probs > 1):
            raise ValueError("marginal probabilities must lie in [0, 1]")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, n_cells: int, value: float = 0.5) -> "MarginalField":
        return cls(np.full(n_cells, value))

    def with_values(self, cells: Sequence[int], values: Iterable[float]) -> "MarginalField":
        """Copy of the field with ``cells`` overwritten."""
        probs = self.probs.copy()
        probs[np.asarray(cells, dtype=int)] = np.clip(np.asarray(list(values), dtype=float), 0.0, 1.0)
        return MarginalField(probs)

    def __len__(self) -> int:
        return int(self.probs.size)


def check_subset_size(size: int, cap: int = DEFAULT_SUBSET_CAP) -> None:
    """Raise CapacityError when a 2^size table would exceed the cap."""
    if size > cap:
        raise CapacityError(
            f"joint table over {size} cells exceeds the subset cap of {cap} "
            f"(2^{size} configurations); use range gates (RGO) or raise subset_cap"
        )


@dataclass(frozen=True, eq=False)
class JointPosterior:
    """
    Log-probability table over all 2^n configurations of an ordered cell subset.

    Args:
        subset: Grid indices, in bit order
        log_weights: Normalized log probabilities indexed by configuration code
    """

    subset: Tuple[int, ...]
    log_weights: np.ndarray

    def __post_init__(self) -> None:
        subset = tuple(int(c) for c in self.subset)
        if len(set(subset)) != len(subset):
            raise ValueError("joint subset has duplicate cells")
        log_weights = _frozen(self.log_weights, float)
        if log_weights.shape != (1 << len(subset),):
            raise ValueError(f"expected {1 << len(subset)} log weights, got {log_weights.shape}")
        object.__setattr__(self, "subset", subset)
        object.__setattr__(self, "log_weights", log_weights)

    @classmethod
    def uniform(cls, subset: Sequence[int], cap: int = DEFAULT_SUBSET_CAP) -> "JointPosterior":
        check_subset_size(len(subset), cap)
        n = len(subset)
        return cls(tuple(subset), np.full(1 << n, -n * np.log(2.0)))

    @classmethod
    def factorized(cls, subset: Sequence[int], probs, cap: int = DEFAULT_SUBSET_CAP) -> "JointPosterior":
        """Product of independent per-cell marginals ``probs`` (one per subset cell)."""
        check_subset_size(len(subset), cap)
        probs = np.asarray(probs, dtype=float)
        if probs.size != len(subset):
            raise ValueError(f"{probs.size} marginals for {len(subset)} cells")
        with np.errstate(divide="ignore"):
            log_one = np.log(probs)
            log_zero = np.log1p(-probs)
        bits = configuration_bits(len(subset)).astype(bool)
        log_weights = np.where(bits, log_one, log_zero).sum(axis=1) if len(subset) else np.zeros(1)
        return cls(tuple(subset), log_weights)

    @classmethod
    def point_mass(cls, subset: Sequence[int], bits) -> "JointPosterior":
        code = OccupancyMap(bits).code
        log_weights = np.full(1 << len(subset), -np.inf)
        log_weights[code] = 0.0
        return cls(tuple(subset), log_weights)

    @property
    def n_cells(self) -> int:
        return len(self.subset)

    def probabilities(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def total(self) -> float:
        """Total probability mass (1 for a normalized table)."""
        return float(np.exp(logsumexp(self.log_weights)))

    def is_normalized(self, tolerance: float = NORMALIZATION_TOLERANCE) -> bool:
        return abs(self.total() - 1.0) <= tolerance


@dataclass(frozen=True, eq=False)
class Ping:
    """
    One time step's binary measurement vector.

    Args:
        s: Time index
        j: Binary vector of length K
        sample_locations: (K, 2) world position of each sample
        pose: Sensor pose (cone pings)
        fov: Sensor cone (cone pings)
        sample_cells: Owning cell of each sample (lattice pings, e.g. the toy problem)
    """

    s: int
    j: np.ndarray
    sample_locations: np.ndarray
    pose: Optional[SensorPose] = None
    fov: Optional[ConeFov] = None
    sample_cells: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        j = _frozen(np.asarray(self.j).ravel(), np.uint8)
        if np.any(j > 1):
            raise ValueError("measurement entries must be 0 or 1")
        locations = _frozen(np.asarray(self.sample_locations, dtype=float).reshape(-1, 2), float)
        if locations.shape[0] != j.size:
            raise ValueError(f"{locations.shape[0]} sample locations for {j.size} samples")
        if (self.pose is None) != (self.fov is None):
            raise ValueError("pose and fov must be given together")
        if self.fov is not None and self.fov.n_intervals != j.size:
            raise ValueError(f"cone has {self.fov.n_intervals} intervals, measurement has {j.size}")
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "sample_locations", locations)
        if self.sample_cells is not None:
            owners = _frozen(np.asarray(self.sample_cells).ravel(), np.int64)
            if owners.size != j.size:
                raise ValueError(f"{owners.size} sample owners for {j.size} samples")
            object.__setattr__(self, "sample_cells", owners)

    @property
    def n_samples(self) -> int:
        return int(self.j.size)

    @property
    def is_cone(self) -> bool:
        return self.fov is not None

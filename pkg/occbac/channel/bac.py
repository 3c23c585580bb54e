"""
BAC / OR-gate sensor model.

Each cell ``i`` reaches measurement sample ``k`` through its own binary
asymmetric channel; the sample reads 1 when any channel output (virtual
occupancy) is 1. For a map ``b``::

    P(j_k = 0 | b) = prod_i [p00_ki (1 - b_i) + p01_ki b_i]

with ``p00 = P(virtual 0 | empty)`` and ``p01 = P(virtual 0 | occupied)``.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.spatial.distance import cdist

from occbac.geometry.grid import ConeFov, interval_centers, interval_index

logger = logging.getLogger(__name__)

NEG_INF = float("-inf")

# Configurations evaluated per block when the likelihood table is not cached.
CHUNK_CONFIGURATIONS = 1 << 14
# Largest (configurations x samples) table kept in memory across pings.
CACHE_LIMIT = 1 << 24


class TransitionVariant(str, Enum):
    """Distance law used for the BAC transition probabilities."""

    ATTENUATED = "attenuated"
    INFLUENCE_DECAY = "influence_decay"
    CONSTANT = "constant"


# Alternative spellings accepted wherever a variant tag is read.
VARIANT_ALIASES = {"paper_attenuated": TransitionVariant.ATTENUATED}


class TransitionModel(BaseModel):
    """
    Heuristic distance-based transition probabilities.

    ``attenuated``: ``p00 = (1-pd)/(1+d)^a``, ``p01 = (1-pfa)/(1+d)^a``.
    ``influence_decay``: ``p00 = 1 - pfa/(1+d)^a``, ``p01 = 1 - pd/(1+d)^a``,
    so a remote cell neither triggers nor masks a sample.
    ``constant``: ``constant_form`` evaluated at ``constant_distance`` for
    every pair.
    """

    model_config = ConfigDict(frozen=True)

    variant: TransitionVariant = Field(TransitionVariant.ATTENUATED, description="Distance law")
    pd: float = Field(0.8, ge=0, le=1, description="Probability of detection")
    pfa: float = Field(0.08, ge=0, le=1, description="Probability of false alarm")
    alpha: float = Field(5.0, ge=1, description="Attenuation exponent")
    constant_distance: float = Field(0.96, ge=0, description="Distance frozen by the constant variant (m)")
    constant_form: TransitionVariant = Field(
        TransitionVariant.ATTENUATED, description="Law evaluated by the constant variant"
    )

    @field_validator("variant", "constant_form", mode="before")
    @classmethod
    def _resolve_alias(cls, value: Any) -> Any:
        if isinstance(value, str):
            return VARIANT_ALIASES.get(value, value)
        return value

    @field_validator("constant_form")
    @classmethod
    def _not_constant(cls, value: TransitionVariant) -> TransitionVariant:
        if value == TransitionVariant.CONSTANT:
            raise ValueError("constant_form must be a distance law, not 'constant'")
        return value


class BacEntry(BaseModel):
    """Transition probabilities of one (measurement, cell) channel."""

    model_config = ConfigDict(frozen=True)

    p00: float = Field(..., ge=0, le=1)
    p01: float = Field(..., ge=0, le=1)

    @property
    def p10(self) -> float:
        """False alarm probability pfa_ki."""
        return 1.0 - self.p00

    @property
    def p11(self) -> float:
        """Detection probability pd_ki."""
        return 1.0 - self.p01

    @property
    def pfa(self) -> float:
        return self.p10

    @property
    def pd(self) -> float:
        return self.p11


class BacRow(NamedTuple):
    """Row k of a BacTable."""

    p00: np.ndarray
    p01: np.ndarray


def _readonly(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=float)
    values.setflags(write=False)
    return values


@dataclass(frozen=True, eq=False)
class BacTable:
    """
    Transition probabilities for K measurement samples x an ordered cell subset.

    Args:
        p00: Array (K, n) of P(virtual 0 | empty)
        p01: Array (K, n) of P(virtual 0 | occupied)
        cell_indices: Grid index of each column
    """

    p00: np.ndarray
    p01: np.ndarray
    cell_indices: Tuple[int, ...]
    _key: bytes = field(default=b"", repr=False, compare=False)

    def __post_init__(self) -> None:
        p00 = _readonly(self.p00)
        p01 = _readonly(self.p01)
        if p00.ndim != 2 or p00.shape != p01.shape:
            raise ValueError(f"p00 {p00.shape} and p01 {p01.shape} must be equal 2D shapes")
        if p00.shape[1] != len(self.cell_indices):
            raise ValueError(f"table has {p00.shape[1]} columns for {len(self.cell_indices)} cells")
        for name, values in (("p00", p00), ("p01", p01)):
            if np.any(np.isnan(values)) or np.any(values < 0) or np.any(values > 1):
                raise ValueError(f"{name} entries must lie in [0, 1]")
        object.__setattr__(self, "p00", p00)
        object.__setattr__(self, "p01", p01)
        object.__setattr__(self, "cell_indices", tuple(int(c) for c in self.cell_indices))
        key = p00.tobytes() + p01.tobytes() + np.asarray(self.cell_indices, dtype=np.int64).tobytes()
        object.__setattr__(self, "_key", key)

    @property
    def n_rows(self) -> int:
        return self.p00.shape[0]

    @property
    def n_cells(self) -> int:
        return self.p00.shape[1]

    @property
    def key(self) -> bytes:
        """Content key; equal tables share cached likelihoods."""
        return self._key

    def row(self, k: int) -> BacRow:
        return BacRow(self.p00[k], self.p01[k])

    def entry(self, k: int, column: int) -> BacEntry:
        return BacEntry(p00=float(self.p00[k, column]), p01=float(self.p01[k, column]))

    def rows(self, indices: Sequence[int]) -> "BacTable":
        """Table restricted to the given measurement rows."""
        indices = list(indices)
        return BacTable(self.p00[indices], self.p01[indices], self.cell_indices)


def transition_matrices(model: TransitionModel, distances) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized transition probabilities for an array of distances.

    Returns:
        (p00, p01) arrays with the shape of ``distances``

    Raises:
        ValueError: For negative distances
    """
    d = np.asarray(distances, dtype=float)
    if np.any(d < 0):
        raise ValueError("distances must be non-negative")

    form = model.variant
    if form == TransitionVariant.CONSTANT:
        d = np.full_like(d, model.constant_distance)
        form = model.constant_form

    scale = (1.0 + d) ** (-model.alpha)
    if form == TransitionVariant.ATTENUATED:
        p00 = (1.0 - model.pd) * scale
        p01 = (1.0 - model.pfa) * scale
    else:
        p00 = 1.0 - model.pfa * scale
        p01 = 1.0 - model.pd * scale
    return p00, p01


def transition_entry(model: TransitionModel, distance: float) -> BacEntry:
    """Transition probabilities of a single cell/sample pair at ``distance``."""
    if distance < 0:
        raise ValueError(f"distance must be non-negative, got {distance}")
    p00, p01 = transition_matrices(model, distance)
    return BacEntry(p00=float(p00), p01=float(p01))


def build_bac_table(
    model: TransitionModel,
    sample_locations: np.ndarray,
    cell_locations: np.ndarray,
    cell_indices: Sequence[int],
) -> BacTable:
    """
    BacTable from Euclidean distances between samples and cell centers.

    Args:
        model: Transition model
        sample_locations: (K, 2) world positions of the measurement samples
        cell_locations: (n, 2) centers of the cells, in column order
        cell_indices: Grid index of each column
    """
    samples = np.asarray(sample_locations, dtype=float).reshape(-1, 2)
    centers = np.asarray(cell_locations, dtype=float).reshape(-1, 2)
    distances = cdist(samples, centers)
    p00, p01 = transition_matrices(model, distances)
    return BacTable(p00, p01, tuple(cell_indices))


def _as_bits(b, width: int) -> np.ndarray:
    bits = np.asarray(b).ravel()
    if bits.size != width:
        raise ValueError(f"map has {bits.size} cells, channel row has {width}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("map entries must be 0 or 1")
    return bits.astype(bool)


def or_gate_zero_likelihood(b, bac_row: BacRow) -> float:
    """P(j_k = 0 | b): every virtual occupancy must come out 0."""
    bits = _as_bits(b, len(bac_row.p00))
    return float(np.prod(np.where(bits, bac_row.p01, bac_row.p00)))


def _log(values: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(values)


def _log_one_minus_exp(log_p: np.ndarray) -> np.ndarray:
    """log(1 - exp(x)) for x <= 0, -inf at x == 0."""
    with np.errstate(divide="ignore"):
        return np.log(-np.expm1(log_p))


def ping_log_likelihood(j, b, table: BacTable) -> float:
    """
    log P(j | b) for one ping, summed over samples in the log domain.

    Returns ``-inf`` when the measurement is impossible under the model.
    """
    j = np.asarray(j).ravel()
    if j.size != table.n_rows:
        raise ValueError(f"measurement has {j.size} samples, table has {table.n_rows} rows")
    bits = _as_bits(b, table.n_cells)
    log_zero = _log(np.where(bits, table.p01, table.p00)).sum(axis=1)
    log_one = _log_one_minus_exp(log_zero)
    total = float(np.where(j == 1, log_one, log_zero).sum())
    return total if not np.isnan(total) else NEG_INF


def configuration_bits(n: int) -> np.ndarray:
    """(2^n, n) matrix; row c holds the map whose integer encoding is c (bit i = b_i)."""
    codes = np.arange(1 << n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(np.uint8)


class OrGateLikelihood:
    """
    log P(j | b) for every configuration b of a cell subset.

    The per-sample terms log P(j_k=0|b) and log P(j_k=1|b) depend only on the
    table, so they are computed once and reused while the table is unchanged
    (when small enough), turning each ping into a column selection and sum.

    Args:
        table: BacTable whose columns are a subset of ``subset``
        subset: Ordered cells spanned by the joint posterior
        cache: Keep the per-sample terms in memory when they fit CACHE_LIMIT
    """

    def __init__(self, table: BacTable, subset: Sequence[int], cache: bool = True):
        subset = [int(c) for c in subset]
        position = {c: p for p, c in enumerate(subset)}
        missing = [c for c in table.cell_indices if c not in position]
        if missing:
            raise ValueError(f"table covers cells {missing} outside the joint subset")

        self.table = table
        self.n_configurations = 1 << len(subset)
        self._columns = [position[c] for c in table.cell_indices]

        self._log_p00 = _log(table.p00)
        self._log_p01 = _log(table.p01)
        zero00 = np.isneginf(self._log_p00)
        zero01 = np.isneginf(self._log_p01)
        finite00 = np.where(zero00, 0.0, self._log_p00)
        finite01 = np.where(zero01, 0.0, self._log_p01)
        self._base = finite00.sum(axis=1)
        self._delta = (finite01 - finite00).T
        self._zero_base = zero00.sum(axis=1)
        self._zero_delta = (zero01.astype(np.int64) - zero00.astype(np.int64)).T
        self._n_subset = len(subset)

        self._cached: Optional[Tuple[np.ndarray, np.ndarray]] = None
        if cache and self.n_configurations * table.n_rows <= CACHE_LIMIT:
            log_zero = self._log_zero(0, self.n_configurations)
            self._cached = (log_zero, _log_one_minus_exp(log_zero))

    def _bits(self, start: int, stop: int) -> np.ndarray:
        codes = np.arange(start, stop, dtype=np.int64)
        columns = np.asarray(self._columns, dtype=np.int64)
        return ((codes[:, None] >> columns) & 1).astype(float)

    def _log_zero(self, start: int, stop: int) -> np.ndarray:
        bits = self._bits(start, stop)
        log_zero = self._base + bits @ self._delta
        zeros = self._zero_base + bits @ self._zero_delta
        log_zero[zeros > 0] = NEG_INF
        return log_zero

    def _blocks(self) -> Iterator[Tuple[int, int]]:
        for start in range(0, self.n_configurations, CHUNK_CONFIGURATIONS):
            yield start, min(start + CHUNK_CONFIGURATIONS, self.n_configurations)

    def log_likelihood(self, j) -> np.ndarray:
        """log P(j | b) indexed by configuration code."""
        j = np.asarray(j).ravel()
        if j.size != self.table.n_rows:
            raise ValueError(f"measurement has {j.size} samples, table has {self.table.n_rows} rows")
        ones = j == 1
        if self._cached is not None:
            log_zero, log_one = self._cached
            return log_zero[:, ~ones].sum(axis=1) + log_one[:, ones].sum(axis=1)

        result = np.empty(self.n_configurations)
        for start, stop in self._blocks():
            log_zero = self._log_zero(start, stop)
            result[start:stop] = (
                log_zero[:, ~ones].sum(axis=1) + _log_one_minus_exp(log_zero[:, ones]).sum(axis=1)
            )
        return result


class IdealSensorModel(NamedTuple):
    """Transition probabilities reproducing the ideal range sensor profile."""

    j: np.ndarray
    classes: np.ndarray
    windows: List[np.ndarray]
    p01: List[np.ndarray]


def range_to_measurement(r0: float, fov: ConeFov) -> np.ndarray:
    """Binary vector of length K with a single 1 at the interval nearest ``r0``."""
    j = np.zeros(fov.n_intervals, dtype=np.uint8)
    j[int(np.argmin(np.abs(interval_centers(fov) - r0)))] = 1
    return j


def classify_cells(r0: float, epsilon: float, cell_distances) -> np.ndarray:
    """-1 closer than r0 - eps, 0 within r0 +/- eps, +1 beyond."""
    d = np.asarray(cell_distances, dtype=float)
    classes = np.ones(d.shape, dtype=int)
    classes[np.abs(d - r0) <= epsilon] = 0
    classes[d < r0 - epsilon] = -1
    return classes


def ideal_sensor_bac(
    r0: float,
    fov: ConeFov,
    cell_distances,
    windows: Optional[Sequence[Sequence[int]]] = None,
    epsilon: Optional[float] = None,
    eta_prime: float = 1.0,
) -> IdealSensorModel:
    """
    Per-cell p01 values that make the single-cell update follow the ideal sensor OPP.

    With ``I`` the number of zeros of j inside a cell's window::

        p01 = 0                         in front of the return
        p01 = ((1 - j_k)/eta')^(1/I)    around the return
        p01 = (0.5/eta')^(1/|window|)   behind the return

    Args:
        r0: Scalar range return (m)
        fov: Cone providing the range quantization
        cell_distances: Centerline distance of each cell
        windows: Measurement indices per cell; defaults to the interval holding the cell
        epsilon: Half width of the return band; defaults to one interval width
        eta_prime: Normalizer, must be at least 1 so every p01 stays a probability

    Raises:
        ValueError: For an empty window, epsilon <= 0 or eta_prime < 1
    """
    distances = np.asarray(cell_distances, dtype=float)
    epsilon = fov.interval_width if epsilon is None else epsilon
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if eta_prime < 1:
        raise ValueError(f"eta_prime must be at least 1, got {eta_prime}")
    if windows is None:
        windows = [[interval_index(fov, d)] for d in distances]
    if len(windows) != distances.size:
        raise ValueError(f"{len(windows)} windows for {distances.size} cells")

    j = range_to_measurement(r0, fov)
    classes = classify_cells(r0, epsilon, distances)
    kappas: List[np.ndarray] = []
    values: List[np.ndarray] = []
    for window, cls in zip(windows, classes):
        kappa = np.asarray(window, dtype=int)
        if kappa.size == 0:
            raise ValueError("every cell needs a nonempty measurement window")
        observed = j[kappa]
        if cls == -1:
            p01 = np.zeros(kappa.size)
        elif cls == 0:
            zeros = int(np.sum(observed == 0))
            if zeros == 0:
                p01 = np.zeros(kappa.size)
            else:
                p01 = ((1.0 - observed) / eta_prime) ** (1.0 / zeros)
        else:
            p01 = np.full(kappa.size, (0.5 / eta_prime) ** (1.0 / kappa.size))
        kappas.append(kappa)
        values.append(p01)
    return IdealSensorModel(j=j, classes=classes, windows=kappas, p01=values)


def ideal_sensor_profile(model: IdealSensorModel, eta_prime: float = 1.0) -> np.ndarray:
    """Single-cell posteriors ``eta' * prod_k [p01 (1-j_k) + (1-p01) j_k]`` (clipped to 1)."""
    posteriors = []
    for kappa, p01 in zip(model.windows, model.p01):
        observed = model.j[kappa]
        factors = p01 * (1 - observed) + (1.0 - p01) * observed
        posteriors.append(min(1.0, eta_prime * float(np.prod(factors))))
    return np.asarray(posteriors)

"""
Evaluation metrics: similarity rho, summed Jensen-Shannon divergence and
probability of error over detection thresholds.

All logarithms are natural.
"""

import logging
import math
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import rel_entr

from occbac.estimators.state import MarginalField, OccupancyMap

logger = logging.getLogger(__name__)

ArrayLike = Union[OccupancyMap, MarginalField, Sequence[float], np.ndarray]


def _values(x: ArrayLike) -> np.ndarray:
    if isinstance(x, OccupancyMap):
        return x.bits.astype(float)
    if isinstance(x, MarginalField):
        return x.probs
    return np.asarray(x, dtype=float).ravel()


def _pair(beta: ArrayLike, p: ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    b, q = _values(beta), _values(p)
    if b.shape != q.shape:
        raise ValueError(f"truth has {b.size} cells, field has {q.size}")
    return b, q


def similarity_rho(beta: ArrayLike, p: ArrayLike) -> float:
    """
    Cosine similarity <beta, p> / (|beta| |p|).

    Equals 1 exactly when ``p`` is a positive multiple of ``beta``.

    Raises:
        ValueError: For an all-zero truth map or mismatched lengths
    """
    b, q = _pair(beta, p)
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        raise ValueError("rho is undefined for an all-empty truth map")
    norm_q = float(np.linalg.norm(q))
    if norm_q == 0.0:
        return 0.0
    return float(min(1.0, max(0.0, np.dot(b, q) / (norm_b * norm_q))))


def sjsd(beta: ArrayLike, p: ArrayLike) -> float:
    """
    Sum over cells of the Jensen-Shannon divergence between Bernoulli(beta_i)
    and Bernoulli(p_i).

    Lies in [0, B ln 2]; the maximum is reached when ``p`` is deterministic
    and opposite to ``beta`` in every cell.
    """
    b, q = _pair(beta, p)
    P = np.stack([b, 1.0 - b])
    Q = np.stack([q, 1.0 - q])
    M = 0.5 * (P + Q)
    per_cell = 0.5 * rel_entr(P, M).sum(axis=0) + 0.5 * rel_entr(Q, M).sum(axis=0)
    return float(per_cell.sum())


def detection_map(p: ArrayLike, gamma: float) -> OccupancyMap:
    """Cells declared occupied at threshold ``gamma`` (ties count as occupied)."""
    return OccupancyMap((_values(p) >= gamma).astype(np.uint8))


def gamma_grid(step: float = 0.01) -> List[float]:
    """Thresholds 0, step, ..., 1 (1 always included)."""
    if not 0 < step <= 1:
        raise ValueError(f"gamma step must lie in (0, 1], got {step}")
    n = int(math.floor(1.0 / step + 1e-9))
    grid = [round(i * step, 12) for i in range(n + 1)]
    if grid[-1] < 1.0:
        grid.append(1.0)
    return grid


def error_sweep(beta: ArrayLike, p: ArrayLike, gammas: Iterable[float]) -> List[Tuple[float, float]]:
    """
    Probability of error of the detection map at each threshold.

    Returns:
        (gamma, fraction of cells where the detection map disagrees with beta)

    Raises:
        ValueError: For a threshold outside [0, 1]
    """
    b, q = _pair(beta, p)
    truth = b >= 0.5
    sweep = []
    for gamma in gammas:
        gamma = float(gamma)
        if not 0.0 <= gamma <= 1.0:
            raise ValueError(f"threshold {gamma} outside [0, 1]")
        sweep.append((gamma, float(np.mean((q >= gamma) != truth))))
    return sweep


class MetricsReport(BaseModel):
    """Scores of one final field against its truth map."""

    rho: float = Field(..., ge=0, le=1, description="Cosine similarity")
    sjsd: float = Field(..., ge=0, description="Summed Jensen-Shannon divergence (nats)")
    per_threshold_error: List[Tuple[float, float]] = Field(
        default_factory=list, description="(gamma, probability of error) pairs"
    )


def evaluate(beta: ArrayLike, p: ArrayLike, gammas: Iterable[float] = ()) -> MetricsReport:
    """Compute every metric of a field. rho is reported as 0 for an all-empty truth map."""
    b, q = _pair(beta, p)
    rho = similarity_rho(b, q) if np.any(b) else 0.0
    if not np.any(b):
        logger.warning("Truth map has no occupied cell; rho reported as 0")
    return MetricsReport(rho=rho, sjsd=sjsd(b, q), per_threshold_error=error_sweep(b, q, gammas))


def summarize(rows: Iterable[Dict]) -> Dict[str, Dict[str, float]]:
    """
    Mean and standard deviation of rho and SJSD per method.

    Args:
        rows: Dicts with at least ``method``, ``rho`` and ``sjsd`` keys

    Returns:
        {method: {"n", "rho_mean", "rho_std", "sjsd_mean", "sjsd_std"}} in
        first-seen method order
    """
    grouped: Dict[str, Dict[str, List[float]]] = {}
    for row in rows:
        entry = grouped.setdefault(str(row["method"]), {"rho": [], "sjsd": []})
        entry["rho"].append(float(row["rho"]))
        entry["sjsd"].append(float(row["sjsd"]))

    summary = {}
    for method, values in grouped.items():
        rho = np.asarray(values["rho"])
        divergence = np.asarray(values["sjsd"])
        summary[method] = {
            "n": int(rho.size),
            "rho_mean": float(rho.mean()),
            "rho_std": float(rho.std()),
            "sjsd_mean": float(divergence.mean()),
            "sjsd_std": float(divergence.std()),
        }
    return summary

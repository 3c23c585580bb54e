"""
Oracle suite behind ``occbac selfcheck``.

Each check runs a production code path against an independent reference
on small randomized instances and reports the largest disagreement.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List

import numpy as np
from scipy.stats import binom, norm

from occbac.channel.bac import (
    BacTable,
    TransitionModel,
    TransitionVariant,
    build_bac_table,
    or_gate_zero_likelihood,
)
from occbac.estimators.cone import co_update, rgo_update
from occbac.estimators.general import gf_marginals, gf_update
from occbac.estimators.independence import im_update
from occbac.estimators.state import JointPosterior, MarginalField, OccupancyMap, Ping
from occbac.geometry.grid import (
    ConeFov,
    GridSpec,
    RangeGate,
    SensorPose,
    cell_centers,
    cells_in_cone,
    make_range_gates,
    sample_points,
)
from occbac.utils.errors import SelfCheckError
from occbac.validators.metrics import similarity_rho, sjsd
from occbac.validators.oracle import batch_posterior, linear_marginals, mc_or_gate, point_in_sector

logger = logging.getLogger(__name__)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_table(rng: np.random.Generator, n_rows: int, cells) -> BacTable:
    """BacTable with independent uniform transition probabilities."""
    shape = (n_rows, len(cells))
    return BacTable(rng.uniform(0.05, 0.95, shape), rng.uniform(0.05, 0.95, shape), tuple(cells))


def random_ping(rng: np.random.Generator, s: int, n_rows: int) -> Ping:
    return Ping(s=s, j=rng.integers(0, 2, n_rows), sample_locations=rng.uniform(0, 2, (n_rows, 2)))


def check_gf_oracle(rng: np.random.Generator, instances: int = 20) -> float:
    """Largest marginal gap between sequential GF and batch enumeration."""
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(1, 7))
        cells = tuple(range(n))
        joint = JointPosterior.uniform(cells)
        pings, tables = [], []
        for s in range(int(rng.integers(1, 6))):
            table = random_table(rng, int(rng.integers(1, 5)), cells)
            ping = random_ping(rng, s, table.n_rows)
            joint = gf_update(joint, ping, table)
            pings.append(ping)
            tables.append(table)
        reference = batch_posterior(pings, JointPosterior.uniform(cells), tables)
        worst = max(worst, float(np.max(np.abs(gf_marginals(joint) - linear_marginals(reference)))))
    return worst


def or_gate_exceedances(
    rng: np.random.Generator,
    cases: int,
    n_samples: int = 100_000,
    n_sigma: float = 3.0,
) -> int:
    """Number of random (b, BAC row) cases whose Monte-Carlo estimate misses the analytic value by > n_sigma."""
    exceeded = 0
    for _ in range(cases):
        n = int(rng.integers(1, 7))
        table = random_table(rng, 1, range(n))
        b = rng.integers(0, 2, n)
        analytic = or_gate_zero_likelihood(b, table.row(0))
        empirical = mc_or_gate(b, table.row(0), n_samples, seed=int(rng.integers(2**32)))
        sigma = math.sqrt(max(analytic * (1 - analytic), 1e-12) / n_samples)
        exceeded += abs(analytic - empirical) > n_sigma * sigma
    return exceeded


def allowed_exceedances(cases: int, n_sigma: float = 3.0, confidence: float = 0.999) -> int:
    """Binomial quantile of the count of n_sigma misses expected by chance alone."""
    return int(binom.ppf(confidence, cases, 2 * norm.sf(n_sigma)))


def check_or_gate(rng: np.random.Generator, cases: int = 10) -> int:
    """3-sigma misses beyond what chance allows (0 when consistent)."""
    return max(0, or_gate_exceedances(rng, cases) - allowed_exceedances(cases))


def check_cone_geometry(rng: np.random.Generator, cones: int = 20) -> int:
    """Number of cells where cells_in_cone and the sector oracle disagree."""
    spec = GridSpec(cell_size=0.25, n_x=24, n_y=24)
    centers = cell_centers(spec)
    mismatches = 0
    for _ in range(cones):
        pose = SensorPose(position=tuple(rng.uniform(0, 6, 2)), heading=float(rng.uniform(-math.pi, math.pi)))
        fov = ConeFov(beamwidth=float(rng.uniform(0.05, 1.5)), range_min=0.5, range_max=4.0, n_intervals=8)
        inside = set(int(c) for c in cells_in_cone(spec, pose, fov))
        reference = {i for i, point in enumerate(centers) if point_in_sector(pose, fov, tuple(point))}
        mismatches += len(inside ^ reference)
    return mismatches


def check_reductions(rng: np.random.Generator) -> float:
    """Largest gap along RGO(1 gate) = CO, RGO(singleton gates) = IM and GF(B=1) = IM."""
    model = TransitionModel(variant=TransitionVariant.INFLUENCE_DECAY)
    spec = GridSpec(cell_size=0.5, n_x=6, n_y=6)
    pose = SensorPose(position=(0.0, 1.5), heading=0.0)
    fov = ConeFov(beamwidth=0.6, range_min=0.0, range_max=3.0, n_intervals=6)
    ping = Ping(s=0, j=rng.integers(0, 2, 6), sample_locations=sample_points(pose, fov), pose=pose, fov=fov)
    field = MarginalField(rng.uniform(0.1, 0.9, spec.n_cells))

    gates = make_range_gates(spec, cells_in_cone(spec, pose, fov), pose, fov, 1)
    single_gate = rgo_update(field, ping, gates, spec, model)
    gap = float(np.max(np.abs(single_gate.probs - co_update(field, ping, spec, model).probs)))

    singles = [
        RangeGate(measurement_indices=(k,), cell_indices=(c,), band=(float(k), float(k + 1)))
        for k, c in enumerate((3, 10, 17))
    ]
    association = {gate.cell_indices[0]: list(gate.measurement_indices) for gate in singles}
    rgo = rgo_update(field, ping, singles, spec, model)
    im = im_update(field, ping, association, model, spec)
    gap = max(gap, float(np.max(np.abs(rgo.probs - im.probs))))

    single = GridSpec(cell_size=1.0, n_x=1, n_y=1)
    one_ping = Ping(s=0, j=rng.integers(0, 2, 3), sample_locations=rng.uniform(0, 1, (3, 2)))
    table = build_bac_table(model, one_ping.sample_locations, cell_centers(single), (0,))
    gf = gf_marginals(gf_update(JointPosterior.uniform((0,)), one_ping, table))
    im_single = im_update(MarginalField.uniform(1), one_ping, {0: [0, 1, 2]}, model, single)
    return max(gap, float(abs(gf[0] - im_single.probs[0])))


def check_metric_identities(rng: np.random.Generator) -> float:
    beta = OccupancyMap(rng.integers(0, 2, 16))
    if beta.n_occupied == 0:
        beta = OccupancyMap(np.ones(16, dtype=np.uint8))
    opposite = 1.0 - beta.bits.astype(float)
    return max(
        abs(similarity_rho(beta, beta.bits.astype(float)) - 1.0),
        abs(sjsd(beta, beta.bits.astype(float))),
        abs(sjsd(beta, opposite) - 16 * math.log(2)),
    )


def run_selfcheck(seed: int = 0) -> List[CheckResult]:
    """
    Run every oracle check.

    Raises:
        SelfCheckError: When any check fails; the message lists the failures
    """
    rng = np.random.default_rng(seed)
    checks: List[tuple] = [
        ("gf_vs_batch", lambda: check_gf_oracle(rng), 1e-10, "max marginal gap"),
        ("or_gate_monte_carlo", lambda: check_or_gate(rng), 0, "excess 3-sigma misses"),
        ("cone_membership", lambda: check_cone_geometry(rng), 0, "mismatched cells"),
        ("reduction_chain", lambda: check_reductions(rng), 1e-12, "max marginal gap"),
        ("metric_identities", lambda: check_metric_identities(rng), 1e-12, "max error"),
    ]
    results = []
    for name, check, tolerance, what in checks:
        value = check()
        passed = value <= tolerance
        results.append(CheckResult(name=name, passed=passed, detail=f"{what} {value:.3g} (tolerance {tolerance:g})"))
        log: Callable[..., None] = logger.info if passed else logger.error
        log(f"selfcheck {name}: {'ok' if passed else 'FAILED'} - {what} {value:.3g}")

    failed = [result for result in results if not result.passed]
    if failed:
        raise SelfCheckError("; ".join(f"{result.name}: {result.detail}" for result in failed))
    return results

"""
Experiment Orchestrator - config-driven trials of occupancy estimators.
"""

import csv
import io
import json
import logging
import math
import os
import platform
import re
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pydantic
import scipy
import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator
from tqdm import tqdm

import occbac
from occbac.connectors.image_export import export_grid_image
from occbac.connectors.scenario_file import load_scenario, save_field, save_scenario
from occbac.estimators.base_estimator import EstimatorSettings
from occbac.estimators.sequence import run_sequence
from occbac.estimators.state import MarginalField, OccupancyMap
from occbac.geometry.grid import ConeFov, GridSpec
from occbac.scenarios.base import Scenario, VehiclePath, derive_seed, substream
from occbac.scenarios.sonar import arc_path, generate_cone_sweep, straight_path
from occbac.scenarios.toy import TOY_GRID, checkerboard_truth, generate_toy, random_truth, rectangles_truth
from occbac.utils.errors import ConfigError
from occbac.utils.io import atomic_write_text, format_number
from occbac.validators.metrics import evaluate, gamma_grid, similarity_rho, sjsd, summarize

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "OCCBAC_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "results"
LABEL_PATTERN = re.compile(r"^[A-Za-z0-9_.-]+$")

Point = Tuple[float, float]


class TruthConfig(BaseModel):
    """How the true map of each trial is drawn."""

    kind: Literal["checkerboard", "random", "rectangles"] = Field("random", description="Truth builder")
    p_occupied: float = Field(0.5, ge=0, le=1, description="Occupancy probability of random maps")
    phase: int = Field(0, ge=0, le=1, description="Checkerboard phase")
    targets: List[Tuple[Point, Point]] = Field(default_factory=list, description="Opposite corners of targets (m)")

    @model_validator(mode="after")
    def _targets_for_rectangles(self) -> "TruthConfig":
        if self.kind == "rectangles" and not self.targets:
            raise ValueError("rectangles truth needs at least one target")
        return self

    def build(self, spec: GridSpec, rng: np.random.Generator) -> OccupancyMap:
        if self.kind == "checkerboard":
            return checkerboard_truth(spec, self.phase)
        if self.kind == "rectangles":
            return rectangles_truth(spec, self.targets)
        return random_truth(spec, rng, self.p_occupied)


class FovConfig(BaseModel):
    """Sensor cone, beamwidth in degrees."""

    beamwidth_deg: float = Field(..., gt=0, lt=180, description="Horizontal beamwidth (deg)")
    range_min: float = Field(0.0, ge=0, description="Closest range (m)")
    range_max: float = Field(..., gt=0, description="Farthest range (m)")
    n_intervals: int = Field(..., ge=1, description="Range intervals K")

    def to_fov(self) -> ConeFov:
        return ConeFov(
            beamwidth=math.radians(self.beamwidth_deg),
            range_min=self.range_min,
            range_max=self.range_max,
            n_intervals=self.n_intervals,
        )


class PathConfig(BaseModel):
    """Vehicle path: a straight track or a circular arc."""

    shape: Literal["straight", "arc"] = Field("straight", description="Path shape")
    n_pings: int = Field(..., ge=1, description="Number of pings")
    look: Literal["starboard", "port", "forward"] = Field("starboard", description="Sensor direction")
    start: Optional[Point] = Field(None, description="Straight path start (m)")
    end: Optional[Point] = Field(None, description="Straight path end (m)")
    center: Optional[Point] = Field(None, description="Arc center (m)")
    radius: Optional[float] = Field(None, gt=0, description="Arc radius (m)")
    start_angle_deg: float = Field(0.0, description="Arc start angle (deg)")
    end_angle_deg: float = Field(90.0, description="Arc end angle (deg)")

    @model_validator(mode="after")
    def _shape_fields(self) -> "PathConfig":
        if self.shape == "straight" and (self.start is None or self.end is None):
            raise ValueError("straight path needs 'start' and 'end'")
        if self.shape == "arc" and (self.center is None or self.radius is None):
            raise ValueError("arc path needs 'center' and 'radius'")
        return self

    def to_path(self) -> VehiclePath:
        if self.shape == "straight":
            return straight_path(self.start, self.end, self.n_pings, self.look)
        return arc_path(
            self.center,
            self.radius,
            math.radians(self.start_angle_deg),
            math.radians(self.end_angle_deg),
            self.n_pings,
            self.look,
        )


class ToyScenarioConfig(BaseModel):
    """Lattice toy problem: every cell observed through its own samples at every ping."""

    type: Literal["toy"] = "toy"
    grid: GridSpec = Field(TOY_GRID, description="Grid geometry")
    truth: TruthConfig = Field(default_factory=TruthConfig, description="Truth builder")
    pd: float = Field(0.8, ge=0, le=1, description="Probability of detection")
    pfa: float = Field(0.08, ge=0, le=1, description="Probability of false alarm")
    n_pings: int = Field(15, ge=1, description="Pings per trial")
    samples_per_cell: int = Field(9, ge=1, description="Lattice samples per cell (square number)")


class ConeSweepScenarioConfig(BaseModel):
    """Cone-sensor sweep along a vehicle path."""

    type: Literal["cone_sweep"] = "cone_sweep"
    grid: GridSpec = Field(..., description="Grid geometry")
    truth: TruthConfig = Field(default_factory=TruthConfig, description="Truth builder")
    fov: FovConfig = Field(..., description="Sensor cone")
    path: PathConfig = Field(..., description="Vehicle path")
    pd: float = Field(0.8, ge=0, le=1, description="Probability of detection")
    pfa: float = Field(0.08, ge=0, le=1, description="Probability of false alarm")
    alpha: Optional[float] = Field(None, ge=0, description="Detection attenuation exponent")


class FileScenarioConfig(BaseModel):
    """Scenario read from a scenario file (relative paths resolve against the config file)."""

    type: Literal["file"] = "file"
    path: Path = Field(..., description="Scenario file")


ScenarioConfig = Annotated[
    Union[ToyScenarioConfig, ConeSweepScenarioConfig, FileScenarioConfig],
    Field(discriminator="type"),
]


class MetricsConfig(BaseModel):
    """Metric and image settings."""

    gamma_step: float = Field(0.01, gt=0, le=1, description="Spacing of the detection threshold grid")
    pixels_per_cell: int = Field(8, ge=1, description="Image pixels per grid cell side")


class ExperimentConfig(BaseModel):
    """Experiment configuration model."""

    name: str = Field("experiment", description="Experiment name")
    description: Optional[str] = Field(None, description="Experiment description")
    seed: int = Field(0, ge=0, description="Master seed")
    trials: int = Field(1, ge=1, description="Independent trials")
    jobs: int = Field(1, ge=1, description="Worker processes")
    output_dir: Optional[Path] = Field(None, description="Output directory")
    scenario: ScenarioConfig = Field(..., description="Scenario section")
    estimators: List[EstimatorSettings] = Field(..., min_length=1, description="Estimators to compare")
    metrics: MetricsConfig = Field(default_factory=MetricsConfig, description="Metrics section")

    @model_validator(mode="after")
    def _unique_labels(self) -> "ExperimentConfig":
        labels = [settings.label for settings in self.estimators]
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        if duplicates:
            raise ValueError(f"estimator labels must be unique, duplicated: {duplicates}")
        for label in labels:
            if not LABEL_PATTERN.match(label):
                raise ValueError(f"estimator label {label!r} may only use letters, digits, '_', '.' and '-'")
        return self


@dataclass
class TrialResult:
    """Everything one trial contributes to the outputs."""

    trial: int
    seed: int
    truth: OccupancyMap
    metrics: List[Dict[str, Any]] = field(default_factory=list)
    sweeps: Dict[str, List[Tuple[float, float]]] = field(default_factory=dict)
    trajectory: List[Tuple[str, int, float, float]] = field(default_factory=list)
    finals: Dict[str, MarginalField] = field(default_factory=dict)
    scenario: Optional[Scenario] = None


def build_scenario(config: ExperimentConfig, trial: int) -> Scenario:
    """Scenario of one trial; truth and pings draw from substreams of the master seed."""
    section = config.scenario
    if isinstance(section, FileScenarioConfig):
        return load_scenario(section.path)

    truth = section.truth.build(section.grid, substream(config.seed, trial, 0))
    seed = derive_seed(config.seed, trial, 1)
    if isinstance(section, ToyScenarioConfig):
        return generate_toy(
            truth,
            pd=section.pd,
            pfa=section.pfa,
            n_pings=section.n_pings,
            samples_per_cell=section.samples_per_cell,
            seed=seed,
            spec=section.grid,
        )
    return generate_cone_sweep(
        section.grid,
        truth,
        section.path.to_path(),
        section.fov.to_fov(),
        pd=section.pd,
        pfa=section.pfa,
        alpha=section.alpha,
        seed=seed,
    )


def _rho(truth: OccupancyMap, field: MarginalField) -> float:
    return similarity_rho(truth, field) if truth.n_occupied else 0.0


def run_trial(config: ExperimentConfig, trial: int, keep_scenario: bool = False) -> TrialResult:
    """
    Generate one scenario and run every configured estimator on it.

    Module-level so worker processes can receive it.
    """
    scenario = build_scenario(config, trial)
    gammas = gamma_grid(config.metrics.gamma_step)
    result = TrialResult(
        trial=trial,
        seed=scenario.seed,
        truth=scenario.truth,
        scenario=scenario if keep_scenario else None,
    )
    for settings in config.estimators:
        trajectory = run_sequence(settings.method, scenario.pings, scenario.spec, settings)
        for ping, snapshot in zip(scenario.pings, trajectory.snapshots):
            result.trajectory.append(
                (settings.label, ping.s, _rho(scenario.truth, snapshot), sjsd(scenario.truth, snapshot))
            )
        report = evaluate(scenario.truth, trajectory.final, gammas)
        result.metrics.append({"method": settings.label, "rho": report.rho, "sjsd": report.sjsd})
        result.sweeps[settings.label] = report.per_threshold_error
        result.finals[settings.label] = trajectory.final
    return result


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()


def _yaml_line(text: str, loc: Sequence[Union[str, int]]) -> Optional[int]:
    """1-based line of the YAML node at ``loc``, or of its deepest existing parent."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    line = None
    for key in loc:
        if node is None:
            break
        line = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            node = next((value for name, value in node.value if name.value == str(key)), None)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            node = None
    if node is not None:
        line = node.start_mark.line + 1
    return line


class ExperimentOrchestrator:
    """
    Runs a configured experiment end to end.

    Loads and validates the config, runs every trial (optionally in worker
    processes), then writes metrics, error sweeps, trajectories, summary,
    images, final fields and a manifest. Nothing is written until every
    trial has succeeded.

    Args:
        config_path: Path to the experiment YAML/JSON file
        overrides: Top-level config values taking precedence over the file
            (``seed``, ``trials``, ``jobs``, ``output_dir``); None values are ignored

    Example:
        >>> orchestrator = ExperimentOrchestrator("configs/toy_table.yaml", {"trials": 20})
        >>> orchestrator.run()
    """

    def __init__(self, config_path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None):
        self.config_path = Path(config_path)
        self.config: Optional[ExperimentConfig] = None
        self.results: List[TrialResult] = []

        self._load_config(overrides or {})

    def _load_config(self, overrides: Dict[str, Any]) -> None:
        """Load, validate and resolve the experiment configuration."""
        if not self.config_path.exists():
            raise FileNotFoundError(f"Config file not found: {self.config_path}")

        text = self.config_path.read_text(encoding="utf-8")
        is_yaml = self.config_path.suffix in [".yaml", ".yml"]
        try:
            config_dict = yaml.safe_load(text) if is_yaml else json.loads(text)
        except yaml.MarkedYAMLError as e:
            mark = e.problem_mark
            raise ConfigError(
                f"Invalid YAML in {self.config_path}: {e.problem}",
                line=mark.line + 1 if mark else None,
                column=mark.column + 1 if mark else None,
            ) from e
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML in {self.config_path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON in {self.config_path}: {e.msg}", line=e.lineno, column=e.colno) from e

        if not isinstance(config_dict, dict):
            raise ConfigError(f"{self.config_path} must contain a mapping at the top level", line=1)
        config_dict.update({key: value for key, value in overrides.items() if value is not None})

        try:
            config = ExperimentConfig(**config_dict)
        except ValidationError as e:
            error = e.errors()[0]
            where = ".".join(str(part) for part in error["loc"]) or "config"
            line = _yaml_line(text, error["loc"]) if is_yaml else None
            extra = f" ({e.error_count() - 1} more)" if e.error_count() > 1 else ""
            raise ConfigError(f"Invalid config {self.config_path}: {where}: {error['msg']}{extra}", line=line) from e

        if isinstance(config.scenario, FileScenarioConfig):
            scenario_path = config.scenario.path
            if not scenario_path.is_absolute():
                scenario_path = self.config_path.parent / scenario_path
            if not scenario_path.exists():
                raise FileNotFoundError(f"Scenario file not found: {scenario_path}")
            config = config.model_copy(update={"scenario": FileScenarioConfig(path=scenario_path)})
            if config.trials > 1:
                logger.warning("A scenario file yields identical trials; running a single trial")
                config = config.model_copy(update={"trials": 1})

        self.config = config
        logger.info(f"Loaded experiment: {config.name} ({len(config.estimators)} estimators)")

    @property
    def output_dir(self) -> Path:
        """Output directory: config (or override), then $OCCBAC_OUTPUT_DIR, then ./results."""
        if self.config and self.config.output_dir is not None:
            return Path(self.config.output_dir)
        return Path(os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR)

    def run(self, show_progress: bool = True) -> Dict[str, Any]:
        """
        Execute every trial and write the artifacts.

        Args:
            show_progress: Display a tqdm progress bar over trials

        Returns:
            Dictionary with status, output directory, per-method summary and artifact list
        """
        if not self.config:
            raise RuntimeError("No configuration loaded")
        config = self.config
        output_dir = self.output_dir

        logger.info(f"Starting experiment: {config.name} ({config.trials} trials, seed {config.seed})")
        self.results = self._run_trials(show_progress)
        artifacts = self._write_outputs(output_dir)
        summary = summarize(row for result in self.results for row in result.metrics)
        for method, stats in summary.items():
            logger.info(
                f"{method}: rho {stats['rho_mean']:.4f} +/- {stats['rho_std']:.4f}, "
                f"SJSD {stats['sjsd_mean']:.4f} +/- {stats['sjsd_std']:.4f}"
            )
        logger.info(f"Experiment {config.name} completed, outputs in {output_dir}")
        return {
            "status": "completed",
            "trials": len(self.results),
            "output_dir": str(output_dir),
            "summary": summary,
            "artifacts": [str(path) for path in artifacts],
        }

    def _run_trials(self, show_progress: bool) -> List[TrialResult]:
        config = self.config
        trials = range(config.trials)
        disable = None if show_progress else True
        results: List[TrialResult] = []

        if config.jobs == 1 or config.trials == 1:
            for trial in tqdm(trials, desc=config.name, unit="trial", disable=disable):
                try:
                    results.append(run_trial(config, trial, keep_scenario=trial == 0))
                except Exception as e:
                    logger.error(f"Trial {trial} failed: {str(e)}")
                    raise
                logger.debug(f"Trial {trial} completed")
            return results

        with ProcessPoolExecutor(max_workers=config.jobs) as executor:
            futures = {executor.submit(run_trial, config, trial, trial == 0): trial for trial in trials}
            progress = tqdm(as_completed(futures), total=len(futures), desc=config.name, unit="trial", disable=disable)
            for future in progress:
                trial = futures[future]
                try:
                    results.append(future.result())
                except Exception as e:
                    logger.error(f"Trial {trial} failed: {str(e)}")
                    for pending in futures:
                        pending.cancel()
                    raise
        return sorted(results, key=lambda result: result.trial)

    def _write_outputs(self, output_dir: Path) -> List[Path]:
        config = self.config
        output_dir.mkdir(parents=True, exist_ok=True)
        written: List[Path] = []
        labels = [settings.label for settings in config.estimators]

        metrics_rows = [
            (result.trial, result.seed, row["method"], row["rho"], row["sjsd"])
            for result in self.results
            for row in result.metrics
        ]
        written.append(
            atomic_write_text(
                output_dir / "metrics.csv",
                _csv_text(("trial", "seed", "method", "rho", "sjsd"), metrics_rows),
            )
        )

        sweep_rows = []
        for label in labels:
            curves = np.array([[error for _, error in result.sweeps[label]] for result in self.results])
            gammas = [gamma for gamma, _ in self.results[0].sweeps[label]]
            sweep_rows.extend((label, gamma, float(error)) for gamma, error in zip(gammas, curves.mean(axis=0)))
        written.append(
            atomic_write_text(output_dir / "error_sweep.csv", _csv_text(("method", "gamma", "error"), sweep_rows))
        )

        trajectory_rows = [(result.trial, *row) for result in self.results for row in result.trajectory]
        written.append(
            atomic_write_text(
                output_dir / "trajectory.csv",
                _csv_text(("trial", "method", "ping", "rho", "sjsd"), trajectory_rows),
            )
        )

        summary = summarize(row for result in self.results for row in result.metrics)
        summary_rows = [
            (method, stats["n"], stats["rho_mean"], stats["rho_std"], stats["sjsd_mean"], stats["sjsd_std"])
            for method, stats in summary.items()
        ]
        written.append(
            atomic_write_text(
                output_dir / "summary.csv",
                _csv_text(("method", "n", "rho_mean", "rho_std", "sjsd_mean", "sjsd_std"), summary_rows),
            )
        )

        first = self.results[0]
        spec = first.scenario.spec
        pixels = config.metrics.pixels_per_cell
        written.append(export_grid_image(first.truth, spec, output_dir / "truth.pgm", pixels))
        for label in labels:
            written.append(export_grid_image(first.finals[label], spec, output_dir / f"{label}.pgm", pixels))
            written.append(save_field(first.finals[label], spec, output_dir / "fields" / f"{label}.txt"))
        written.append(save_scenario(first.scenario, output_dir / "scenario.txt"))

        manifest = {
            "name": config.name,
            "config_file": str(self.config_path),
            "config": config.model_dump(mode="json"),
            "first_trial_seed": first.seed,
            "versions": {
                "occbac": occbac.__version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "pydantic": pydantic.VERSION,
                "pyyaml": yaml.__version__,
            },
            "artifacts": sorted(str(path.relative_to(output_dir)) for path in written),
        }
        written.append(
            atomic_write_text(output_dir / "manifest.yaml", yaml.safe_dump(manifest, sort_keys=False))
        )
        logger.info(f"Wrote {len(written)} artifacts to {output_dir}")
        return written

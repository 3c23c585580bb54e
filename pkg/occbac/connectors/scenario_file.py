"""
Plain-text scenario and field files.

Scenario files (version 1)::

    occbac-scenario 1
    kind cone_sweep
    grid <origin_x> <origin_y> <cell_size> <n_x> <n_y>
    seed <seed>
    param <name> <value>            (zero or more)
    fov <beamwidth> <range_min> <range_max> <K>      (cone scenarios)
    truth
    <n_y lines of n_x 0/1 characters, grid row 0 first>
    pings <S>
    ping <s> <x> <y> <heading> <0/1 string>          (cone scenarios)
    ping <s> <0/1 string>                            (toy scenarios)

Field files (version 1)::

    occbac-field 1
    grid <origin_x> <origin_y> <cell_size> <n_x> <n_y>
    <B lines, one probability per cell>

Floats are written with ``repr`` so a round trip is bit-exact. Toy pings
carry no geometry; their sample lattice is rebuilt from the
``samples_per_cell`` parameter.
"""

import logging
from pathlib import Path
from typing import Any, Iterator, List, Optional, Tuple

import numpy as np

from occbac.estimators.state import MarginalField, OccupancyMap, Ping
from occbac.geometry.grid import ConeFov, GridSpec, SensorPose, sample_points
from occbac.scenarios.base import Scenario, VehiclePath
from occbac.scenarios.toy import lattice_samples
from occbac.utils.errors import ScenarioFormatError
from occbac.utils.io import PathLike, atomic_write_text

logger = logging.getLogger(__name__)

SCENARIO_MAGIC = "occbac-scenario"
FIELD_MAGIC = "occbac-field"
FORMAT_VERSION = 1


def _format_value(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _parse_value(token: str) -> Any:
    if token == "null":
        return None
    if token in ("true", "false"):
        return token == "true"
    try:
        return int(token)
    except ValueError:
        return float(token)


def _grid_line(spec: GridSpec) -> str:
    x0, y0 = spec.origin
    return f"grid {repr(float(x0))} {repr(float(y0))} {repr(float(spec.cell_size))} {spec.n_x} {spec.n_y}"


def _bits(values: np.ndarray) -> str:
    return "".join("1" if v else "0" for v in values)


def format_scenario(scenario: Scenario) -> str:
    """Text of a scenario file."""
    lines = [f"{SCENARIO_MAGIC} {FORMAT_VERSION}", f"kind {scenario.kind}", _grid_line(scenario.spec)]
    lines.append(f"seed {int(scenario.seed)}")
    for name, value in scenario.parameters.items():
        lines.append(f"param {name} {_format_value(value)}")
    if scenario.fov is not None:
        fov = scenario.fov
        lines.append(
            f"fov {repr(float(fov.beamwidth))} {repr(float(fov.range_min))} "
            f"{repr(float(fov.range_max))} {fov.n_intervals}"
        )
    lines.append("truth")
    grid = scenario.truth.bits.reshape(scenario.spec.n_y, scenario.spec.n_x)
    lines.extend(_bits(row) for row in grid)
    lines.append(f"pings {scenario.n_pings}")
    for ping in scenario.pings:
        if ping.is_cone:
            x, y = ping.pose.position
            lines.append(
                f"ping {ping.s} {repr(float(x))} {repr(float(y))} {repr(float(ping.pose.heading))} {_bits(ping.j)}"
            )
        else:
            lines.append(f"ping {ping.s} {_bits(ping.j)}")
    return "\n".join(lines) + "\n"


def save_scenario(scenario: Scenario, path: PathLike) -> Path:
    target = atomic_write_text(path, format_scenario(scenario))
    logger.info(f"Saved scenario ({scenario.n_pings} pings) to {target}")
    return target


class _Lines:
    """Line cursor that reports 1-based line numbers in errors."""

    def __init__(self, text: str):
        self._lines = [line.rstrip("\r") for line in text.split("\n")]
        if self._lines and self._lines[-1] == "":
            self._lines.pop()
        self.number = 0

    def next(self, what: str) -> str:
        if self.number >= len(self._lines):
            raise ScenarioFormatError(f"unexpected end of file, expected {what}", line=self.number + 1)
        self.number += 1
        return self._lines[self.number - 1]

    def peek(self) -> Optional[str]:
        return self._lines[self.number] if self.number < len(self._lines) else None

    def fields(self, keyword: str, count: Optional[int] = None) -> List[str]:
        tokens = self.next(f"'{keyword}' line").split()
        if not tokens or tokens[0] != keyword:
            raise ScenarioFormatError(f"expected '{keyword}'", line=self.number)
        if count is not None and len(tokens) != count + 1:
            raise ScenarioFormatError(f"'{keyword}' takes {count} values, got {len(tokens) - 1}", line=self.number)
        return tokens[1:]

    def error(self, message: str) -> ScenarioFormatError:
        return ScenarioFormatError(message, line=self.number)


def _parse_bits(token: str, width: int, lines: _Lines) -> np.ndarray:
    if len(token) != width or set(token) - {"0", "1"}:
        raise lines.error(f"expected {width} 0/1 characters, got {token!r}")
    return np.frombuffer(token.encode("ascii"), dtype=np.uint8) - ord("0")


def _check_header(lines: _Lines, magic: str) -> None:
    tokens = lines.next("header").split()
    if len(tokens) != 2 or tokens[0] != magic:
        raise lines.error(f"not a {magic} file")
    if tokens[1] != str(FORMAT_VERSION):
        raise lines.error(f"unsupported format version {tokens[1]}")


def _parse_grid(lines: _Lines) -> GridSpec:
    values = lines.fields("grid", 5)
    try:
        return GridSpec(
            origin=(float(values[0]), float(values[1])),
            cell_size=float(values[2]),
            n_x=int(values[3]),
            n_y=int(values[4]),
        )
    except ValueError as e:
        raise lines.error(f"invalid grid: {e}") from e


def parse_scenario(text: str) -> Scenario:
    """
    Parse the text of a scenario file.

    Raises:
        ScenarioFormatError: With the offending line number
    """
    lines = _Lines(text)
    _check_header(lines, SCENARIO_MAGIC)
    kind = lines.fields("kind", 1)[0]
    spec = _parse_grid(lines)
    try:
        seed = int(lines.fields("seed", 1)[0])
    except ValueError as e:
        raise lines.error("seed must be an integer") from e

    parameters = {}
    while (lines.peek() or "").startswith("param "):
        name, token = lines.fields("param", 2)
        try:
            parameters[name] = _parse_value(token)
        except ValueError as e:
            raise lines.error(f"invalid value for parameter {name}") from e

    fov = None
    if (lines.peek() or "").startswith("fov "):
        values = lines.fields("fov", 4)
        try:
            fov = ConeFov(
                beamwidth=float(values[0]),
                range_min=float(values[1]),
                range_max=float(values[2]),
                n_intervals=int(values[3]),
            )
        except ValueError as e:
            raise lines.error(f"invalid fov: {e}") from e

    lines.fields("truth", 0)
    rows = [_parse_bits(lines.next("truth row").strip(), spec.n_x, lines) for _ in range(spec.n_y)]
    truth = OccupancyMap(np.concatenate(rows))

    try:
        n_pings = int(lines.fields("pings", 1)[0])
    except ValueError as e:
        raise lines.error("ping count must be an integer") from e

    if fov is None:
        samples_per_cell = parameters.get("samples_per_cell")
        if not isinstance(samples_per_cell, int):
            raise lines.error("toy scenarios need an integer 'samples_per_cell' parameter")
        try:
            locations, owners = lattice_samples(spec, samples_per_cell)
        except ValueError as e:
            raise lines.error(str(e)) from e

    pings = []
    poses = []
    for _ in range(n_pings):
        tokens = lines.fields("ping")
        try:
            if fov is not None:
                if len(tokens) != 5:
                    raise lines.error(f"cone ping takes 5 values, got {len(tokens)}")
                pose = SensorPose(position=(float(tokens[1]), float(tokens[2])), heading=float(tokens[3]))
                j = _parse_bits(tokens[4], fov.n_intervals, lines)
                poses.append(pose)
                pings.append(Ping(s=int(tokens[0]), j=j, sample_locations=sample_points(pose, fov), pose=pose, fov=fov))
            else:
                if len(tokens) != 2:
                    raise lines.error(f"toy ping takes 2 values, got {len(tokens)}")
                j = _parse_bits(tokens[1], owners.size, lines)
                pings.append(Ping(s=int(tokens[0]), j=j, sample_locations=locations, sample_cells=owners))
        except ScenarioFormatError:
            raise
        except ValueError as e:
            raise lines.error(f"invalid ping: {e}") from e

    if lines.peek() is not None:
        lines.next("end of file")
        raise lines.error("trailing content after the last ping")

    path = VehiclePath(poses=tuple(poses)) if fov is not None else None
    return Scenario(
        kind=kind, spec=spec, truth=truth, pings=pings, seed=seed, parameters=parameters, fov=fov, path=path
    )


def load_scenario(path: PathLike) -> Scenario:
    """
    Read a scenario file.

    Raises:
        FileNotFoundError: When the file does not exist
        ScenarioFormatError: When it is malformed
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Scenario file not found: {path}")
    scenario = parse_scenario(path.read_text(encoding="utf-8"))
    logger.info(f"Loaded {scenario.kind} scenario with {scenario.n_pings} pings from {path}")
    return scenario


def format_field(field: MarginalField, spec: GridSpec) -> str:
    if len(field) != spec.n_cells:
        raise ValueError(f"field has {len(field)} cells, grid has {spec.n_cells}")
    lines = [f"{FIELD_MAGIC} {FORMAT_VERSION}", _grid_line(spec)]
    lines.extend(repr(float(p)) for p in field.probs)
    return "\n".join(lines) + "\n"


def save_field(field: MarginalField, spec: GridSpec, path: PathLike) -> Path:
    return atomic_write_text(path, format_field(field, spec))


def _probabilities(lines: _Lines, count: int) -> Iterator[float]:
    for _ in range(count):
        token = lines.next("probability").strip()
        try:
            value = float(token)
        except ValueError as e:
            raise lines.error(f"not a number: {token!r}") from e
        if not 0.0 <= value <= 1.0:
            raise lines.error(f"probability {value} outside [0, 1]")
        yield value


def parse_field(text: str) -> Tuple[MarginalField, GridSpec]:
    """
    Parse the text of a field file.

    Raises:
        ScenarioFormatError: With the offending line number
    """
    lines = _Lines(text)
    _check_header(lines, FIELD_MAGIC)
    spec = _parse_grid(lines)
    probs = list(_probabilities(lines, spec.n_cells))
    if lines.peek() is not None:
        lines.next("end of file")
        raise lines.error(f"more than {spec.n_cells} probabilities")
    return MarginalField(np.asarray(probs)), spec


def load_field(path: PathLike) -> Tuple[MarginalField, GridSpec]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Field file not found: {path}")
    return parse_field(path.read_text(encoding="utf-8"))

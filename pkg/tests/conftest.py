"""Shared fixtures for the occbac test suite."""

import math

import numpy as np
import pytest

from occbac.channel.bac import TransitionModel, TransitionVariant
from occbac.geometry.grid import ConeFov, GridSpec, SensorPose


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_grid():
    """4 x 4 grid of 1 m cells with its corner at the origin."""
    return GridSpec(cell_size=1.0, n_x=4, n_y=4)


@pytest.fixture
def toy_grid():
    return GridSpec(cell_size=0.5, n_x=4, n_y=4)


@pytest.fixture
def decay_model():
    return TransitionModel(variant=TransitionVariant.INFLUENCE_DECAY, pd=0.8, pfa=0.08, alpha=5)


@pytest.fixture
def side_cone():
    """Pose and cone looking along +x from the left edge of a 6 x 6 grid of 0.5 m cells."""
    spec = GridSpec(cell_size=0.5, n_x=6, n_y=6)
    pose = SensorPose(position=(0.0, 1.5), heading=0.0)
    fov = ConeFov(beamwidth=0.6, range_min=0.0, range_max=3.0, n_intervals=6)
    return spec, pose, fov


@pytest.fixture
def wide_cone():
    """Cone from outside a 4 x 4 unit grid that covers every cell center."""
    pose = SensorPose(position=(-1.0, 2.0), heading=0.0)
    fov = ConeFov(beamwidth=math.radians(179.0), range_min=0.0, range_max=100.0, n_intervals=4)
    return pose, fov


@pytest.fixture
def toy_config_text():
    """Small toy experiment: 2 x 2 grid, 4 samples per cell, every method."""
    return """\
name: tiny_toy
seed: 7
trials: 2

scenario:
  type: toy
  grid:
    cell_size: 0.5
    n_x: 2
    n_y: 2
  truth:
    kind: random
  n_pings: 3
  samples_per_cell: 4

estimators:
  - method: GF
    transition: &channel
      variant: influence_decay
      alpha: 5
  - method: CO
    transition: *channel
  - method: RGO
    sections: 2
    transition: *channel
  - method: IM
    neighborhood: 0.6
    transition: *channel
  - method: CM
    label: CM-default

metrics:
  gamma_step: 0.1
  pixels_per_cell: 2
"""


@pytest.fixture
def toy_config_file(tmp_path, toy_config_text):
    path = tmp_path / "tiny_toy.yaml"
    path.write_text(toy_config_text, encoding="utf-8")
    return path

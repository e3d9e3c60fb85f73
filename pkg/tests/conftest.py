"""Shared fixtures: small fast scenarios and fields for unit tests."""

import numpy as np
import pytest

from duct_planner.cgm import DuctModelParams, GridSpec, synthesize_duct_map
from duct_planner.evaluator import Scenario, UniformField
from duct_planner.scenario import default_radio


@pytest.fixture(scope="session")
def radio():
    return default_radio()


@pytest.fixture(scope="session")
def small_scenario(radio):
    """Straight east 7.2 km run: 36-slot budget, arrival after 18 slots."""
    return Scenario(a=(0.0, 0.0, radio.z_tx), b=(7200.0, 0.0, radio.z_tx),
                    v=20.0, delta_t=20.0, delta_small_t=1.0, t_max=720.0,
                    d_bits=1e9, radio=radio, name="small")


@pytest.fixture(scope="session")
def uniform_field():
    """Gain corresponding to a 130 dB loss everywhere."""
    return UniformField(1e-13)


@pytest.fixture(scope="session")
def small_cgm():
    spec = GridSpec(delta_d=100.0, delta_h=1.0, n_range=200, n_height=40)
    return synthesize_duct_map(DuctModelParams(), spec, 10e9)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

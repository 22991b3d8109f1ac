"""Shared fixtures; expensive objects are built once per session."""

from __future__ import annotations

import numpy as np
import pytest

from lgtq.circuit_engine import exact_propagator
from lgtq.config import load_config
from lgtq.group_core import make_q8
from lgtq.pulse_hardware.bank import build_qubit_bank, build_theta_bank


@pytest.fixture(scope="session")
def q8():
    return make_q8()


@pytest.fixture(scope="session")
def fig2_cfg():
    return load_config("fig2")


@pytest.fixture(scope="session")
def fig3_cfg():
    return load_config("fig3")


@pytest.fixture(scope="session")
def plaquette_propagator(fig3_cfg):
    """Exact propagator of the single Q8 plaquette (dimension 4096)."""
    return exact_propagator(fig3_cfg.group, fig3_cfg.model, fig3_cfg.geometry)


@pytest.fixture(scope="session")
def theta_bank(fig2_cfg):
    """Pulse-simulated controlled permutations at the default hardware point."""
    return build_theta_bank(fig2_cfg.hardware, fig2_cfg.group)


@pytest.fixture(scope="session")
def qubit_bank(fig2_cfg):
    return build_qubit_bank(fig2_cfg.hardware)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

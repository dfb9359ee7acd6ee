"""Shared fixtures: Pauli matrices, seeded generators and scenario documents."""

import json
from pathlib import Path

import numpy as np
import pytest

from quantum_model import HamiltonianSpec, StateVector, TimeGrid

SCENARIO_DIR = Path(__file__).parent / "scenarios"

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


@pytest.fixture
def paulis():
    return {"I": I2, "X": SX, "Y": SY, "Z": SZ}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def sigma_z():
    return HamiltonianSpec.constant(SZ, hermitian_hint=True)


@pytest.fixture
def sigma_x():
    return HamiltonianSpec.constant(SX, hermitian_hint=True)


@pytest.fixture
def up():
    return StateVector(np.array([1.0, 0.0]), 0.0)


@pytest.fixture
def full_turn():
    """[0, 2 pi] with 2000 steps."""
    return TimeGrid(0.0, 2.0 * np.pi, 2000)


@pytest.fixture
def scenario_payload():
    """Fresh parsed copy of the bundled demo scenario."""
    return json.loads((SCENARIO_DIR / "demo.json").read_text())


@pytest.fixture
def write_scenario(tmp_path):
    def _write(payload, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return path

    return _write

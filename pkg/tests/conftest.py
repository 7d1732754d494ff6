import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sweepsolve.circuits import build_circuit
from sweepsolve.lcs import lcs_to_sweeping


@pytest.fixture(scope="session")
def circuit_system():
    return build_circuit(variant="smooth")


@pytest.fixture(scope="session")
def circuit_reform(circuit_system):
    return lcs_to_sweeping(circuit_system)


@pytest.fixture(scope="session")
def circuit_poly(circuit_reform):
    return circuit_reform.poly


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)

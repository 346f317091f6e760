import numpy as np
import pytest

from geomgate.fock import coherent_state
from geomgate.oracle import IntegratorConfig, evolve_master, product_state
from geomgate.qubits import qubit_00
from geomgate.schedules import step_circuit


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger numba compilation once so timed criteria measure physics, not the JIT."""
    s = step_circuit(1.0, 0.2)
    joint = product_state(qubit_00(), coherent_state(0.0, 8))
    evolve_master(joint, s, 0.05, IntegratorConfig(dt=0.02, certify=True, tolerance=1.0))

import numpy as np
import pytest

from anyonlab import AbelianGroup, EdgeLattice, QuantumDoubleModel


@pytest.fixture(scope="session")
def z2():
    return AbelianGroup((2,))


@pytest.fixture(scope="session")
def z3():
    return AbelianGroup((3,))


@pytest.fixture(scope="session")
def tc22(z2):
    """Toric code on the 2x2 torus (8 qubits)."""
    return QuantumDoubleModel(EdgeLattice.torus(2, 2), z2)


@pytest.fixture(scope="session")
def tc23(z2):
    """Toric code on the 2x3 torus (12 qubits)."""
    return QuantumDoubleModel(EdgeLattice(2, 3), z2)


@pytest.fixture(scope="session")
def z3_23(z3):
    return QuantumDoubleModel(EdgeLattice(2, 3), z3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

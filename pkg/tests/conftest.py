import numpy as np
import pytest

from dimerbath.models import ElectronicParams, ModeSpec
from dimerbath.spaces import DensityMatrix, SpaceLayout


@pytest.fixture
def params():
    """Detuned, coupled dimer used throughout (criterion-1 electronic set)."""
    return ElectronicParams(0.25, -0.25, 0.5)


@pytest.fixture
def mode():
    return ModeSpec(1.0, 0.2)


@pytest.fixture
def site1():
    return DensityMatrix(SpaceLayout.electronic_only(),
                         np.diag([1.0, 0.0]).astype(complex))


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)

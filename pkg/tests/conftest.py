import numpy as np
import pytest

from pawtime.dynamics import FiniteMatrix, FiniteVec

RABI_H = np.array([[0.0, 0.5], [0.5, 0.0]])  # (Omega/2) sigma_x with Omega = 1
UP = np.array([1.0, 0.0])


@pytest.fixture
def rabi():
    return FiniteMatrix(RABI_H)


@pytest.fixture
def up():
    return FiniteVec(UP)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

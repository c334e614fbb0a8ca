import math

import pytest

from extkernel.orthopoly import build_recurrence
from extkernel.quadrature import WeightSpec

SQRT_PI = math.sqrt(math.pi)


@pytest.fixture(scope="session")
def gaussian():
    return WeightSpec((0.0, 0.0, 1.0))


@pytest.fixture(scope="session")
def quartic():
    return WeightSpec((0.0, 0.0, 0.0, 0.0, 1.0))


@pytest.fixture(scope="session")
def gaussian_table(gaussian):
    return build_recurrence(gaussian, 24)


@pytest.fixture(scope="session")
def quartic_table(quartic):
    return build_recurrence(quartic, 24)

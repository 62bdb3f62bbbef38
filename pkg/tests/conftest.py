import math

import numpy as np
import pytest

from hyperac.potential import QUARTIC, PotentialSpec


def _zero(u):
    return np.zeros_like(np.asarray(u, dtype=float))


FLAT = PotentialSpec("flat", _zero, _zero, _zero, check=False)

# F = sin^2(pi (u+1)/2): wells at +-1, sqrt(2F) = sqrt(2) cos(pi u / 2) on [-1, 1]
SINE = PotentialSpec(
    "sine",
    lambda u: np.sin(0.5 * np.pi * (u + 1.0)) ** 2,
    lambda u: -0.5 * np.pi * np.sin(np.pi * (u + 1.0)),
    lambda u: -0.5 * np.pi**2 * np.cos(np.pi * (u + 1.0)),
)

# F = (u^2 - 1)^2
STEEP = PotentialSpec(
    "steep",
    lambda u: (u * u - 1.0) ** 2,
    lambda u: 4.0 * u - 4.0 * u * u * u,
    lambda u: 4.0 - 12.0 * u * u,
)


@pytest.fixture
def flat():
    return FLAT


@pytest.fixture
def quartic():
    return QUARTIC


def tanh_layer(x, eps, center=0.0):
    return np.tanh((x - center) / (math.sqrt(2.0) * eps))

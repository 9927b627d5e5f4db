import numpy as np
import pytest

from elastica_fem import (BoundaryConditions, ConstraintVariant, FunctionOracle,
                          Mesh1D, assemble_matrices)
from elastica_fem.experiments import named_experiment


@pytest.fixture(scope="session")
def circle_spec():
    return named_experiment("circle")


@pytest.fixture(scope="session")
def helix_spec():
    return named_experiment("helix")


@pytest.fixture(scope="session")
def oval_spec():
    return named_experiment("oval-h2")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_graded_mesh(rng, a=0.0, length=None, max_elements=20):
    """Mildly graded mesh with quasi-uniformity ratio below 3."""
    M = int(rng.integers(1, max_elements + 1))
    widths = rng.uniform(0.5, 1.4, M)
    nodes = a + np.concatenate([[0.0], np.cumsum(widths)])
    if length is not None:
        nodes = a + (nodes - a) * length / (nodes[-1] - a)
    return Mesh1D(nodes)


def smooth_unit_speed_curve(rng, num_modes=3):
    """Random planar unit-speed curve: direction angle is a trig polynomial."""
    coeffs = rng.normal(scale=0.8, size=(num_modes, 2))

    def theta(x):
        x = np.asarray(x, dtype=float)
        out = 0.3 * x
        for k, (a, b) in enumerate(coeffs, start=1):
            out = out + a * np.sin(k * x) + b * np.cos(k * x)
        return out

    def value(x):
        # not needed analytically; integral evaluated on demand is overkill,
        # tests use the derivative only
        raise NotImplementedError

    def deriv(x):
        t = theta(x)
        return np.stack([np.cos(t), np.sin(t)], axis=-1)

    return FunctionOracle(value=deriv, deriv=deriv)

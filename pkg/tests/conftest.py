import numpy as np
import pytest

from bifract.core import InterpolationProblem


@pytest.fixture
def tent():
    """N=2 uniform tent data with asymmetric-to-peak scalings."""
    return InterpolationProblem([0.0, 0.5, 1.0], [0.0, 1.0, 0.0], [0.6, 0.8, 0.6])


@pytest.fixture
def flat():
    """Zero scalings: the interpolant is the data polyline."""
    return InterpolationProblem([0.0, 0.5, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0])


@pytest.fixture
def diagonal():
    """Collinear data on y = x, zero scalings."""
    return InterpolationProblem([0.0, 0.5, 1.0], [0.0, 0.5, 1.0], [0.0, 0.0, 0.0])


def random_problem(rng, n=None, uniform=None, s_cap=0.9, unit=False):
    """Seeded random problem; mixes uniform/non-uniform knots unless pinned."""
    if n is None:
        n = int(rng.integers(2, 7))
    if uniform is None:
        uniform = bool(rng.integers(0, 2))
    if uniform or unit:
        knots = np.arange(n + 1) / n
    else:
        knots = np.concatenate([[0.0], np.sort(rng.uniform(0.02, 0.98, n - 1)), [1.0]])
        knots = knots * rng.uniform(0.5, 3.0) + rng.uniform(-1.0, 1.0)
    values = rng.uniform(-2.0, 2.0, n + 1)
    scalings = rng.uniform(-s_cap, s_cap, n + 1)
    return InterpolationProblem(knots, values, scalings)

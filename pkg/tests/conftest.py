import sys
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from plateau.contour import builtin_contour  # noqa: E402
from plateau.solver import SolverConfig, solve_plateau  # noqa: E402


def _solve(name, params=None, dimension=None, **cfg):
    c = builtin_contour(name, params or {}, dimension)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return solve_plateau(c, SolverConfig(**cfg))


@pytest.fixture(scope="session")
def ellipse_solution():
    return _solve("ellipse", {"a": 2.0, "b": 1.0}, 2)


@pytest.fixture(scope="session")
def tilted_solution():
    return _solve("tilted_circle", {}, 3)


@pytest.fixture(scope="session")
def circle_solution():
    return _solve("circle", {}, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

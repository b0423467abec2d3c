from pathlib import Path

import numpy as np
import pytest

from indefspline.krein import KreinSpace
from indefspline.pencil import ProblemData

DATA = Path(__file__).parent / "data"


def d1() -> ProblemData:
    """K Hilbert, E = diag(1, -1), T = diag(1, 2), V = I: interval [-1, 4]."""
    return ProblemData(np.diag([1.0, 2.0]), np.eye(2), KreinSpace.hilbert(2),
                       KreinSpace.diagonal([1, -1]))


def d2() -> ProblemData:
    """T = I3, V = first two coordinates, E = diag(1, -1): interval [-1, 1]."""
    return ProblemData(np.eye(3), np.eye(3)[:2], KreinSpace.hilbert(3),
                       KreinSpace.diagonal([1, -1]))


def d3() -> ProblemData:
    """K = diag(1, 1, -1), T = I3, V = [e1; e2 - e3], E Hilbert."""
    return ProblemData(np.eye(3), np.array([[1.0, 0, 0], [0, 1, -1]]),
                       KreinSpace.diagonal([1, 1, -1]), KreinSpace.hilbert(2))


@pytest.fixture
def D1():
    return d1()


@pytest.fixture
def D2():
    return d2()


@pytest.fixture
def D3():
    return d3()


@pytest.fixture
def data_dir():
    return DATA


def cgauss(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)

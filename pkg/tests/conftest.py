import numpy as np
import pytest

from sgmc import ParameterLine, ProblemInstance


@pytest.fixture
def two_column():
    """A = [1 1], rho = 0, y = 2, lambda = 1: one duplicated column, three
    known zones {|y| <= lam}, {y >= lam}, {y <= -lam}."""
    return ProblemInstance(A=np.array([[1.0, 1.0]]), rho=0.0, y=np.array([2.0]), lam=1.0)


@pytest.fixture
def descent_line():
    """The worked two-segment line: y(t) = 1 fixed, lambda(t) = 2 - t."""
    inst = ProblemInstance(A=np.array([[1.0, 1.0]]), rho=0.0, y=np.array([1.0]), lam=2.0)
    line = ParameterLine(b0=inst.b, lam0=2.0, delta_b=np.zeros(2), delta_lam=-1.0)
    return inst, line


def random_instance(seed, m=4, n=8, rho=0.0, lam=None, scale=1.0):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(m, n)) * scale
    y = rng.normal(size=m) * scale
    if lam is None:
        lam = 0.4 * float(np.abs(A.T @ y).max())
        lam = max(lam, 0.1)
    return ProblemInstance(A=A, rho=rho, y=y, lam=lam)


@pytest.fixture
def rand_4x8():
    return random_instance(11, m=4, n=8, rho=0.0)

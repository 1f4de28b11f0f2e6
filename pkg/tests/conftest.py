import numpy as np
import pytest
from hypothesis import strategies as st

from anglerealize.geometry import PointSet, random_point_set

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def report():
    def _report(name, passed, detail=""):
        ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}".rstrip())
        print(ACCEPTANCE_LINES[-1])
        return passed
    return _report


@pytest.fixture
def square():
    return PointSet([[0, 0], [1, 0], [1, 1], [0, 1]])


@pytest.fixture
def equilateral():
    return PointSet([[0, 0], [1, 0], [0.5, np.sqrt(3) / 2]])


def rotation(phi):
    return np.array([[np.cos(phi), -np.sin(phi)], [np.sin(phi), np.cos(phi)]])


MIRROR = np.array([[1.0, 0.0], [0.0, -1.0]])


@st.composite
def point_sets(draw, n_min=3, n_max=7):
    n = draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_point_set(n, 1.0, seed)


@st.composite
def similarities(draw):
    phi = draw(st.floats(0, 2 * np.pi))
    mirror = draw(st.booleans())
    scale = draw(st.floats(0.1, 10.0))
    shift = draw(st.tuples(st.floats(-100, 100), st.floats(-100, 100)))
    mat = rotation(phi) @ (MIRROR if mirror else np.eye(2))
    return mat, scale, np.array(shift)

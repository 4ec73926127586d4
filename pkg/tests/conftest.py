import numpy as np
import pytest

from cssolitons.params import PhaseState, SolitonParams
from cssolitons.skewlin import skew_normal_form


def random_skew(rng, n):
    M = rng.standard_normal((n, n))
    return 0.5 * (M - M.T)


def rot2(omega=1.0):
    return np.array([[0.0, -omega], [omega, 0.0]])


def rot3(omega=1.0):
    return np.array([[0.0, -omega, 0.0], [omega, 0.0, 0.0], [0.0, 0.0, 0.0]])


def make_params(alpha, A, v=None):
    n = len(A)
    if v is None:
        v = np.zeros(n)
    return SolitonParams(alpha=alpha, spectrum=skew_normal_form(np.asarray(A, float)), v=np.asarray(v, float))


def unit(x):
    x = np.asarray(x, float)
    return x / np.linalg.norm(x)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, shown after capture ends
acceptance_lines: list = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from kacpp.field import KacPolynomial
from kacpp.sampler import CoefficientLaw, SeedSpec, draw_coefficients


def gaussian_poly(n, trial=0, seed=99):
    return KacPolynomial(draw_coefficients(CoefficientLaw("gaussian"), n, SeedSpec(seed, trial)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, printed after the run regardless of capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

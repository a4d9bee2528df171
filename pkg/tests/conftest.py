import numpy as np
import pytest

from curvetrak import FieldModel


@pytest.fixture
def ellipse():
    return FieldModel.ellipse()


@pytest.fixture
def matyas():
    return FieldModel.matyas()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def circle():
    return FieldModel.polynomial([(2, 0, 1.0), (0, 2, 1.0)])


def linear_x():
    return FieldModel.polynomial([(1, 0, 1.0)])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])

import numpy as np
import pytest

from vmtorus.model import SineModelParams


@pytest.fixture
def pd_params():
    return SineModelParams.bivariate(5, 10, 5)


@pytest.fixture
def nonpd_params():
    return SineModelParams.bivariate(10, 20, 15)


def grid_integral(fn, resolution=512):
    """Rectangle rule over [0, 2pi)^2 for a batch function of (m, 2) points."""
    x = 2 * np.pi * np.arange(resolution) / resolution
    a, b = np.meshgrid(x, x, indexing="ij")
    pts = np.column_stack([a.ravel(), b.ravel()])
    return fn(pts).sum() * (2 * np.pi / resolution) ** 2


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import pytest
from hypothesis import HealthCheck, settings

from gaugenf.gauge import gauge_distribution
from gaugenf.models import (
    affine_involutive,
    dirac_counterexample,
    driftless_ten,
    heisenberg,
    oscillator,
    pendulum_on_line,
)
from gaugenf.stabilization import stabilize

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def driftless():
    c = stabilize(driftless_ten())
    return c, gauge_distribution(c)


@pytest.fixture(scope="session")
def counterexample():
    spec, reg = dirac_counterexample()
    c = stabilize(spec, regularize=reg)
    return c, gauge_distribution(c)


@pytest.fixture(scope="session")
def pendulum():
    return stabilize(pendulum_on_line())


@pytest.fixture(scope="session")
def oscillator_complete():
    return stabilize(oscillator())


@pytest.fixture(scope="session")
def affine():
    c = stabilize(affine_involutive())
    return c, gauge_distribution(c)


@pytest.fixture(scope="session")
def heis():
    c = stabilize(heisenberg())
    return c, gauge_distribution(c)


def pytest_terminal_summary(terminalreporter):
    from .gate import LINES

    if LINES:
        terminalreporter.section("acceptance")
        for line in LINES:
            terminalreporter.write_line(line)

import functools

import pytest
from hypothesis import HealthCheck, settings

from knotenergy.zoo import sample_zoo

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def zoo(spec: str):
    """Cached zoo curve; curves are immutable so sharing is safe."""
    return sample_zoo(spec)


@pytest.fixture(scope="session")
def trefoil():
    return zoo("torus2q:q=3,n=128")


@pytest.fixture(scope="session")
def figure8():
    return zoo("figure8:n=128")


@pytest.fixture(scope="session")
def circle():
    return zoo("circle:n=128")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

from geoflow import build_example

settings.register_profile("geoflow", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("geoflow")


@pytest.fixture(scope="session")
def tree2():
    return build_example("tree(2)").expand(8)


@pytest.fixture(scope="session")
def tree3():
    return build_example("tree(3)").expand(5)


@pytest.fixture(scope="session")
def doubled2():
    return build_example("doubled(2)").expand(6)


@pytest.fixture(scope="session")
def circle_rose2():
    return build_example("circle_rose(2)").expand(5)


@pytest.fixture
def half():
    return Fraction(1, 2)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

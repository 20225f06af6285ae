import pytest

from draps.scenario import data_path
from helpers import worker


@pytest.fixture
def hetero_workers():
    return [worker("w1", 4, 1), worker("w2", 8, 4), worker("w3", 16, 8)]


@pytest.fixture
def profile_dir():
    return data_path("traces", "profiles")


@pytest.fixture
def scenario_dir():
    return data_path("scenarios")


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance")
        for line in test_acceptance.RESULTS.values():
            terminalreporter.write_line(line)

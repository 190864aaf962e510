import pytest

from rabi_qpt.files import RunConfig
from rabi_qpt.pipeline import analyze, run_scan

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def default_config():
    return RunConfig()


@pytest.fixture(scope="session")
def rabi_curves(default_config):
    return run_scan(default_config)


@pytest.fixture(scope="session")
def rabi_analysis(rabi_curves, default_config):
    return analyze(rabi_curves, default_config)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

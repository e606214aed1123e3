import sys

import pytest
from hypothesis import settings
from loguru import logger

# Monte-Carlo 3-sigma checks must not flake from run to run.
settings.register_profile("repro", derandomize=True, deadline=None, print_blob=True)
settings.load_profile("repro")


@pytest.fixture(autouse=True)
def _quiet_logs():
    logger.remove()
    logger.add(sys.stderr, level="WARNING")
    yield


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[number])

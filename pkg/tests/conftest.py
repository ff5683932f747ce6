import pytest

from realchar.smoothfn import SmoothWindow


@pytest.fixture(scope="session")
def bump():
    return SmoothWindow()


@pytest.fixture(scope="session")
def shifted():
    return SmoothWindow("shifted_power_bump", (0.1, 0.8, 2.0))


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)

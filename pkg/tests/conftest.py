import pytest

from causal_layering.presets import affine_chain3, xor_chain3

# one verdict line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def affine_chain():
    return affine_chain3()


@pytest.fixture(scope="session")
def xor_chain():
    return xor_chain3()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)

import pytest

from vdwwaves.gas import GasParameters, coefficients


@pytest.fixture
def ideal():
    return coefficients(GasParameters())


@pytest.fixture
def real():
    """Generic admissible van der Waals state."""
    return coefficients(GasParameters(a_tilde=0.4, b_tilde=0.1))


_ACCEPTANCE = []


@pytest.fixture
def acceptance_log():
    """Collects one summary line per acceptance criterion."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)

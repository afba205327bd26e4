import pytest
from hypothesis import HealthCheck, settings

from fluxcool.model import reference_model

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def weak():
    return reference_model()


@pytest.fixture(scope="session")
def strong():
    return reference_model(gamma2_ghz=1.0)

from acceptance_report import LINES as ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])

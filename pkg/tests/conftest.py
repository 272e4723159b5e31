import pytest

from ehdthrust.core import GasMedium, LossModel, ThrusterGeometry, TownsendModel
from ehdthrust.flightdyn import ActuatorModel, QuadParams

ACCEPTANCE_LINES = []


@pytest.fixture
def model():
    return TownsendModel(c_geom=2.06e-12, v_crit=3600.0)


@pytest.fixture
def geom():
    return ThrusterGeometry()


@pytest.fixture
def gas():
    return GasMedium()


@pytest.fixture
def params():
    return QuadParams()


@pytest.fixture
def actuator(model):
    return ActuatorModel(model, LossModel(0.87))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

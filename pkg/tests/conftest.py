import numpy as np
import pytest

from qubitprobe.model import MeasurementConfig

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20200413)


@pytest.fixture
def fig1_config():
    def make(xi, **kw):
        return MeasurementConfig.from_axis(xi, [1, 1, 1], **kw)
    return make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

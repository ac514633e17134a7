import numpy as np
import pytest

from optosqueeze.model import params_from_cooperativity


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ref_point():
    """Gamma_M/kappa = 1e-4, n_th = 10, C = 1e4 at the large-C optimal ratio."""
    return params_from_cooperativity(1e4, 1 - np.sqrt(21 / 1e4), kappa=1.0, gamma_m=1e-4, n_th=10)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)

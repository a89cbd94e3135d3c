import numpy as np
import pytest

from mhhelix.geometry import HelixParams, simulate_helix
from mhhelix.simlab import ALPHA_TURN, STANDARD_SETS


def standard_cloud(set_id, sigma2=None, seed=0, axis=(0.0, 0.0, 1.0), shift=(0.0, 0.0, 0.0)):
    n, r, c, s2 = STANDARD_SETS[set_id]
    params = HelixParams.with_axis(r, c, ALPHA_TURN, axis=axis, shift=shift)
    return simulate_helix(params, n, s2 if sigma2 is None else sigma2, seed), params


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

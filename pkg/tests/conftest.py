"""Shared fixtures and the acceptance-summary terminal section."""
import numpy as np
import pytest

from forestperc.forest import Forest, Window, sample_poisson_forest

# populated by tests/test_acceptance.py; printed after the run so the
# per-criterion verdicts survive pytest's output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def small_forest() -> Forest:
    """20-ish trees on a 40 x 40 window, fixed seed."""
    return sample_poisson_forest(0.0125, Window(40.0, 40.0), 1.0, seed=3)


@pytest.fixture
def two_tree_forest() -> Forest:
    """Vertical pair whose wake boundaries cross at speed 1."""
    centers = np.array([[10.0, 21.2], [10.0, 20.0]])
    return Forest(Window(40.0, 40.0), 1.0, centers, 0.00125, 0)


@pytest.fixture
def cascade_forest() -> Forest:
    """Three spread trees whose funnels cascade at speed 5.

    Pairwise center distances all exceed 2, so no disks overlap; the
    interactions are purely between wake boundaries.
    """
    centers = np.array([[24.0, 20.9], [20.0, 20.0], [18.0, 21.0]])
    return Forest(Window(40.0, 40.0), 1.0, centers, 0.001875, 0)

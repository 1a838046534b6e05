import math

import pytest

from mcastsim.network import Network, WaxmanParams, calibrate_beta, generate_waxman

ACCEPTANCE_LINES: list[str] = []


def make_network(coords, pairs):
    """Network from explicit coordinates; weights are the Euclidean lengths."""
    edges = tuple(sorted(
        (min(u, v), max(u, v), math.dist(coords[u], coords[v])) for u, v in pairs
    ))
    return Network(coords, edges)


@pytest.fixture
def chain():
    # a-b-c with weights 1 and 2
    return make_network([(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)], [(0, 1), (1, 2)])


@pytest.fixture(scope="session")
def beta30():
    return calibrate_beta(30, (1000.0, 1000.0), 0.25, 3.0, 99)


def small_net(seed, n=30, beta=None, degree=3.0):
    if beta is None:
        beta = calibrate_beta(n, (1000.0, 1000.0), 0.25, degree, 99)
    return generate_waxman(WaxmanParams(n, beta, seed=seed))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

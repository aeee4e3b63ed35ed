import numpy as np
import pytest
from scipy.sparse.csgraph import shortest_path

from maxdiv import build_finite_space, space_from_points

ACCEPTANCE_LINES = []


def random_metric_space(rng, n, kind=None):
    """Random symmetric metric-origin space: Euclidean, l1, or a graph metric."""
    kind = kind or rng.choice(["euclidean", "l1", "graph"])
    if kind == "graph":
        W = rng.uniform(0.1, 3.0, (n, n))
        W = np.triu(W, 1)
        W = W + W.T
        D = shortest_path(W, directed=False)
        return space_from_points(D, metric="precomputed")
    dim = int(rng.integers(1, 4))
    P = rng.random((n, dim)) * rng.uniform(0.3, 4.0)
    return space_from_points(P, metric=kind)


def random_psd_space(rng, n):
    dim = int(rng.integers(1, 4))
    P = rng.random((n, dim)) * rng.uniform(0.3, 4.0)
    return space_from_points(P, metric=rng.choice(["euclidean", "l1"]))


def cycle_space(n):
    i = np.arange(n)
    d = np.abs(i[:, None] - i[None, :])
    D = np.minimum(d, n - d).astype(float)
    return space_from_points(D, metric="precomputed")


CHAIN = [[1, 1, 0], [1, 1, 1], [0, 1, 1]]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def chain_space():
    return build_finite_space(CHAIN)


@pytest.fixture
def acceptance_report():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

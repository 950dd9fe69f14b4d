import numpy as np
import pytest
from hypothesis import strategies as st

from wlembed import kernels
from wlembed.graph import build_graph


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    return kernels.available_backends()[request.param]


def random_graph(rng, n_max=9, K=3, p=0.4, n_min=1):
    n = int(rng.integers(n_min, n_max + 1))
    labels = rng.integers(1, K + 1, size=n).tolist()
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return build_graph(n, labels, edges, K=K)


@st.composite
def graphs(draw, max_nodes=8, K=3):
    n = draw(st.integers(1, max_nodes))
    labels = draw(st.lists(st.integers(1, K), min_size=n, max_size=n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), max_size=2 * n, unique=True)) if pairs else []
    return build_graph(n, labels, chosen, K=K)


def permuted(graph, rng):
    return graph.permute(rng.permutation(graph.num_nodes).tolist())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one pass/fail line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

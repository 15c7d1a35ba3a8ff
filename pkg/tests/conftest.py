import sys
from pathlib import Path

import numpy as np
import pytest

from synmorph.graph import from_edges, giant_component

sys.path.insert(0, str(Path(__file__).parent))


def complete(n):
    return from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path(n):
    return from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def star(k):
    return from_edges(k + 1, [(0, i) for i in range(1, k + 1)])


def triangle_with_pendant():
    # a=0, b=1, c=2 form the triangle, d=3 hangs off a
    return from_edges(4, [(0, 1), (0, 2), (1, 2), (0, 3)])


def gnp(n, p, rng):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return from_edges(n, edges)


def random_connected_graphs(count=25, n_max=40, p=0.15, seed=20240611):
    """Giant components of seeded G(n, p) draws with at least 5 nodes."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(12, n_max + 1))
        g = giant_component(gnp(n, p, rng))
        if g.n_nodes >= 5:
            out.append(g)
    return out


@pytest.fixture(scope="session")
def random_graphs():
    return random_connected_graphs()


def core_periphery(n=500, core=20, seed=7):
    """A dense ``core``-clique with random trees grown off it up to ``n`` nodes."""
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(core) for j in range(i + 1, core)]
    for v in range(core, n):
        edges.append((int(rng.integers(0, v)), v))
    return from_edges(n, edges)


# One line per acceptance criterion, echoed again at the end of the run.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)

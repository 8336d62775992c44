from pathlib import Path

import numpy as np
import pytest

from tenscol.graph import Graph

FIXTURES = Path(__file__).parent / "fixtures"

# Two small populations for the penalty term: n=4, k=3, D=3, one conflict each.
# Edges (1-based) {1,2} {1,3} {2,3} {2,4} {3,4}.
KAPPA_EDGES = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]
# (a) conflicts on three different edges: {1,2}, {1,3}, {3,4}
SPREAD_CONFLICTS = [[0, 0, 1, 2], [0, 1, 0, 2], [0, 1, 2, 2]]
# (b) solutions 1 and 3 both conflict on {1,3}, with different colors
SHARED_CONFLICTS = [[0, 1, 0, 2], [0, 0, 1, 2], [2, 0, 2, 1]]


def onehot(colors, k, dtype=np.float64):
    colors = np.asarray(colors)
    out = np.zeros(colors.shape + (k,), dtype=dtype)
    np.put_along_axis(out, colors[..., None], 1, axis=-1)
    return out


@pytest.fixture
def kappa_graph():
    return Graph.from_edges(4, KAPPA_EDGES, name="kappa-example")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_instance(rng, max_d=8, max_n=8, max_k=8, p=None):
    d = int(rng.integers(1, max_d + 1))
    n = int(rng.integers(1, max_n + 1))
    k = int(rng.integers(1, max_k + 1))
    p = rng.random() if p is None else p
    upper = np.triu(rng.random((n, n)) < p, 1)
    a = (upper | upper.T).astype(np.int8)
    colors = rng.integers(0, k, size=(d, n))
    return Graph.from_adjacency(a), colors, k


def load_exact_fixtures():
    rows = []
    for line in (FIXTURES / "gnp10_exact.txt").read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        name, mode, value, *witness = line.split()
        seed = int(name.rsplit("_s", 1)[1])
        rows.append((seed, mode, int(value), [int(c) for c in witness]))
    return rows


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

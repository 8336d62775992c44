import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load_exact_fixtures
from tenscol.graph import Coloring, Graph, Mode, validate
from tenscol.instances import complete, cycle, edgeless, random_gnp
from tenscol.oracle import InstanceTooLarge, exact_chromatic, k_colorable


def brute_force_min_k(g: Graph, mode: Mode) -> int:
    """Enumerate every assignment; vectorised over all k**n colorings."""
    eu = np.array([u for u, _ in sorted(g.edges)], dtype=int)
    ev = np.array([v for _, v in sorted(g.edges)], dtype=int)
    for k in range(1, g.n + 1):
        grid = np.array(list(itertools.product(range(k), repeat=g.n)), dtype=int)
        ok = ~(grid[:, eu] == grid[:, ev]).any(axis=1) if len(eu) else np.ones(len(grid), bool)
        if mode is Mode.ECP:
            c1 = g.n // k
            c2 = c1 if g.n % k == 0 else c1 + 1
            sizes = np.stack([(grid == c).sum(axis=1) for c in range(k)], axis=1)
            ok &= ((sizes == c1) | (sizes == c2)).all(axis=1)
        if ok.any():
            return k
    raise AssertionError


@pytest.mark.parametrize(
    "g, mode, expected",
    [
        (complete(4), Mode.GCP, 4),
        (cycle(5), Mode.GCP, 3),
        (cycle(4), Mode.GCP, 2),
        (edgeless(4), Mode.GCP, 1),
        (edgeless(4), Mode.ECP, 1),
        (complete(4), Mode.ECP, 4),
    ],
)
def test_exact_examples(g, mode, expected):
    r = exact_chromatic(g, mode)
    assert r.chromatic_number == expected
    assert validate(g, r.witness, mode).legal
    assert r.explored_nodes > 0


def test_star_is_not_equitably_2_colorable():
    # K_{1,4}: chi = 2; equitable needs ceil(4/2) + 1 = 3 (center alone)
    star = Graph.from_edges(5, [(0, i) for i in range(1, 5)])
    assert exact_chromatic(star, Mode.GCP).chromatic_number == 2
    assert exact_chromatic(star, Mode.ECP).chromatic_number == 3


def test_refuses_large():
    with pytest.raises(InstanceTooLarge):
        exact_chromatic(edgeless(13))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.floats(0, 1), st.integers(0, 10**6), st.sampled_from(list(Mode)))
def test_branch_and_bound_matches_enumeration(n, p, seed, mode):
    g = random_gnp(n, p, seed)
    assert exact_chromatic(g, mode).chromatic_number == brute_force_min_k(g, mode)


@pytest.mark.parametrize("seed, mode, value, witness", load_exact_fixtures())
def test_frozen_gnp10_fixtures(seed, mode, value, witness):
    g = random_gnp(10, 0.5, seed)
    result = exact_chromatic(g, mode)
    assert result.chromatic_number == value
    assert validate(g, Coloring.of(witness, value), mode).legal
    assert k_colorable(g, value - 1, mode)[0] is None

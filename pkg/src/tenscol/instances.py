"""Benchmark-family graph generators.

``mycielski`` rebuilds the COLOR02 ``mycielN`` graphs by the Mycielski
construction (isomorphic to the published files: originals, then their shadow
copies, then the apex). The random
families are seeded look-alikes of the DIMACS ``DSJC`` (uniform edges) and
``R`` (unit-square geometric) graphs; they match size and density, not the
original edge sets.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .graph import Graph, load_dimacs


def mycielski(level: int) -> Graph:
    """The graph published as ``myciel<level>.col`` (level 3 = Groetzsch graph).

    Chromatic number is ``level + 1``; level 4 has 23 vertices and 71 edges.
    """
    if level < 2:
        raise ValueError("level must be >= 2")
    n, edges = 5, [(i, (i + 1) % 5) for i in range(5)]  # myciel2 = C5
    for _ in range(level - 2):
        new = list(edges)
        for u, v in edges:
            new.append((u, v + n))
            new.append((v, u + n))
        apex = 2 * n
        new.extend((n + i, apex) for i in range(n))
        n, edges = 2 * n + 1, new
    return Graph.from_edges(n, edges, name=f"myciel{level}")


def complete(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)], name=f"K{n}")


def cycle(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], name=f"C{n}")


def edgeless(n: int) -> Graph:
    return Graph.from_edges(n, [], name=f"E{n}")


def random_gnp(n: int, p: float, seed: int) -> Graph:
    rng = np.random.Generator(np.random.PCG64(seed))
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()), name=f"gnp{n}_{p:g}_s{seed}")


def random_gnm(n: int, m: int, seed: int) -> Graph:
    """Uniform graph with exactly ``m`` edges."""
    rng = np.random.Generator(np.random.PCG64(seed))
    iu, ju = np.triu_indices(n, 1)
    pick = np.sort(rng.choice(iu.size, size=m, replace=False))
    return Graph.from_edges(n, zip(iu[pick].tolist(), ju[pick].tolist()), name=f"gnm{n}_{m}_s{seed}")


def random_geometric(n: int, radius: float, seed: int) -> Graph:
    """Points uniform in the unit square, edge when distance <= radius."""
    rng = np.random.Generator(np.random.PCG64(seed))
    pts = rng.random((n, 2))
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    iu, ju = np.nonzero(np.triu(dist <= radius, 1))
    return Graph.from_edges(n, zip(iu.tolist(), ju.tolist()), name=f"geo{n}_{radius:g}_s{seed}")


# size/density look-alikes for DIMACS instances that are not redistributed here
STAND_INS = {
    "DSJC125.1": lambda: random_gnm(125, 736, seed=1),
    "DSJC125.5": lambda: random_gnm(125, 3891, seed=5),
    "DSJC125.9": lambda: random_gnm(125, 6961, seed=9),
    "R125.1": lambda: random_geometric(125, 0.1, seed=1),
    "R250.5": lambda: random_geometric(250, 0.5, seed=6),  # clique number 65, like the original
}

INSTANCE_DIR_ENV = "TENSCOL_INSTANCE_DIR"


def builtin(name: str) -> Graph:
    """Generated graph by name: ``mycielN``, ``K<n>``, ``C<n>``, ``E<n>`` or a stand-in key."""
    if name in STAND_INS:
        g = STAND_INS[name]()
        return Graph(g.n, g.edges, name=f"{name}-standin")
    for prefix, make in (("myciel", mycielski), ("K", complete), ("C", cycle), ("E", edgeless)):
        if name.startswith(prefix) and name[len(prefix):].isdigit():
            return make(int(name[len(prefix):]))
    raise KeyError(f"unknown built-in instance {name!r}")


def find_instance_file(name: str) -> Path | None:
    """``<name>.col`` under $TENSCOL_INSTANCE_DIR, if that variable is set and the file exists."""
    root = os.environ.get(INSTANCE_DIR_ENV)
    if not root:
        return None
    for candidate in (Path(root) / f"{name}.col", Path(root) / name):
        if candidate.is_file():
            return candidate
    return None


def load_instance(spec: str) -> Graph:
    """Resolve an instance argument.

    ``builtin:NAME`` prefers a real ``NAME.col`` from $TENSCOL_INSTANCE_DIR and
    otherwise generates the graph; anything else is read as a DIMACS path.
    """
    if spec.startswith("builtin:"):
        name = spec[len("builtin:"):]
        path = find_instance_file(name)
        return load_dimacs(path) if path else builtin(name)
    return load_dimacs(spec)

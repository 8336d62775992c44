"""Graph ingestion, DSATUR upper bound and solution validation.

Vertices are 0-indexed everywhere inside the package; DIMACS 1-indexing is
converted at the parse/serialize boundary only.
"""

from __future__ import annotations

import enum
import logging
import random
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    GCP = "gcp"
    ECP = "ecp"


class DimacsParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph with a dense 0/1 adjacency matrix."""

    n: int
    edges: frozenset[tuple[int, int]]
    name: str = ""
    adjacency: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        adj = np.zeros((self.n, self.n), dtype=np.int8)
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
            adj[u, v] = adj[v, u] = 1
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], name: str = "") -> "Graph":
        norm = frozenset((min(u, v), max(u, v)) for u, v in edges)
        return cls(n=n, edges=norm, name=name)

    @classmethod
    def from_adjacency(cls, adjacency: np.ndarray, name: str = "") -> "Graph":
        iu, ju = np.nonzero(np.triu(np.asarray(adjacency), 1))
        return cls.from_edges(len(adjacency), zip(iu.tolist(), ju.tolist()), name=name)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def density(self) -> float:
        if self.n < 2:
            return 0.0
        return self.m / (self.n * (self.n - 1) / 2)

    @cached_property
    def edge_index(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoints of every edge as two index arrays (u < v), sorted."""
        ordered = sorted(self.edges)
        u = np.fromiter((e[0] for e in ordered), dtype=np.intp, count=len(ordered))
        v = np.fromiter((e[1] for e in ordered), dtype=np.intp, count=len(ordered))
        return u, v

    def neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in sorted(self.edges):
            nbrs[u].append(v)
            nbrs[v].append(u)
        return nbrs

    def complement_adjacency(self) -> np.ndarray:
        """J - A, diagonal included (1 - a_ii = 1)."""
        return 1 - self.adjacency


@dataclass(frozen=True)
class Coloring:
    assignment: tuple[int, ...]
    k: int

    def __post_init__(self) -> None:
        bad = [c for c in self.assignment if not 0 <= c < self.k]
        if bad:
            raise ValueError(f"color {bad[0]} outside [0, {self.k})")

    @classmethod
    def of(cls, assignment: Sequence[int] | np.ndarray, k: int | None = None) -> "Coloring":
        values = tuple(int(c) for c in assignment)
        if k is None:
            k = max(values) + 1 if values else 1
        return cls(values, k)

    def __len__(self) -> int:
        return len(self.assignment)

    @property
    def colors_used(self) -> int:
        return len(set(self.assignment))

    def group_sizes(self) -> list[int]:
        sizes = [0] * self.k
        for c in self.assignment:
            sizes[c] += 1
        return sizes


@dataclass(frozen=True)
class ValidationReport:
    mode: Mode
    k: int
    conflict_count: int
    equity_violation: int
    legal: bool

    def as_record(self) -> dict:
        return {
            "mode": self.mode.value,
            "k": self.k,
            "conflicts": self.conflict_count,
            "equity_violation": self.equity_violation,
            "legal": self.legal,
        }


def equity_bounds(n: int, k: int) -> tuple[int, int]:
    """Admissible group sizes (c1, c2); c1 == c2 when k divides n."""
    c1 = n // k
    return c1, (c1 if n % k == 0 else c1 + 1)


def _equity_violation(sizes: Iterable[int], n: int, k: int) -> int:
    c1, c2 = equity_bounds(n, k)
    return sum(min(abs(s - c1), abs(s - c2)) for s in sizes)


def validate(g: Graph, c: Coloring, mode: Mode | str = Mode.GCP) -> ValidationReport:
    """Count monochromatic edges and, in ECP mode, the equity surplus/deficit."""
    mode = Mode(mode)
    if len(c) != g.n:
        raise ValueError(f"coloring has {len(c)} entries, graph has {g.n} vertices")
    a = c.assignment
    conflicts = sum(1 for u, v in g.edges if a[u] == a[v])
    equity = _equity_violation(c.group_sizes(), g.n, c.k) if mode is Mode.ECP else 0
    return ValidationReport(mode, c.k, conflicts, equity, conflicts == 0 and equity == 0)


def greedy_upper_bound(g: Graph, seed: int = 0) -> Coloring:
    """DSATUR: color the most saturated vertex next (ties: degree, then seeded)."""
    rng = random.Random(seed)
    nbrs = g.neighbors()
    degree = [len(x) for x in nbrs]
    tiebreak = list(range(g.n))
    rng.shuffle(tiebreak)
    colors = [-1] * g.n
    seen: list[set[int]] = [set() for _ in range(g.n)]
    for _ in range(g.n):
        u = max(
            (v for v in range(g.n) if colors[v] < 0),
            key=lambda v: (len(seen[v]), degree[v], tiebreak[v]),
        )
        col = 0
        while col in seen[u]:
            col += 1
        colors[u] = col
        for v in nbrs[u]:
            seen[v].add(col)
    return Coloring.of(colors)


def parse_dimacs(text: str | bytes, name: str = "") -> Graph:
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    n: int | None = None
    declared_m = 0
    edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        kind = parts[0]
        if kind == "p":
            if n is not None:
                raise DimacsParseError(lineno, "duplicate 'p' line")
            if len(parts) < 4:
                raise DimacsParseError(lineno, "expected 'p edge <n> <m>'")
            try:
                n, declared_m = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsParseError(lineno, f"non-integer token in {raw.strip()!r}") from None
            if n < 1:
                raise DimacsParseError(lineno, f"vertex count {n} < 1")
        elif kind == "e":
            if n is None:
                raise DimacsParseError(lineno, "edge before 'p' line")
            if len(parts) < 3:
                raise DimacsParseError(lineno, "expected 'e <i> <j>'")
            try:
                i, j = int(parts[1]), int(parts[2])
            except ValueError:
                raise DimacsParseError(lineno, f"non-integer token in {raw.strip()!r}") from None
            for x in (i, j):
                if not 1 <= x <= n:
                    raise DimacsParseError(lineno, f"vertex {x} outside [1, {n}]")
            if i == j:
                logger.warning("line %d: self-loop on vertex %d ignored", lineno, i)
                continue
            edges.add((min(i, j) - 1, max(i, j) - 1))
        else:
            logger.warning("line %d: unknown line type %r skipped", lineno, kind)
    if n is None:
        raise DimacsParseError(0, "missing 'p edge <n> <m>' line")
    if len(edges) != declared_m:
        logger.warning("declared %d edges, loaded %d distinct edges", declared_m, len(edges))
    return Graph(n=n, edges=frozenset(edges), name=name)


def load_dimacs(path: str | Path) -> Graph:
    path = Path(path)
    return parse_dimacs(path.read_bytes(), name=path.stem)


def to_dimacs(g: Graph, comments: Sequence[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p edge {g.n} {g.m}")
    lines.extend(f"e {u + 1} {v + 1}" for u, v in sorted(g.edges))
    return "\n".join(lines) + "\n"

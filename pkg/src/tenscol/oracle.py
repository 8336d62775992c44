"""Independent ground truth: exact small-graph coloring and loop formulas.

Nothing here imports the tensor kernels or the fitness module. Inputs are
nested lists (or anything indexable as such) and every formula is written
as explicit index loops over the summations it defines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .graph import Coloring, Graph, Mode

DEFAULT_MAX_N = 12


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class ExactResult:
    mode: Mode
    chromatic_number: int
    witness: Coloring
    explored_nodes: int


def _tolist(x):
    return x.tolist() if hasattr(x, "tolist") else x


class _Search:
    def __init__(self, g: Graph, k: int, equitable: bool):
        self.n = g.n
        self.k = k
        self.nbrs = [set() for _ in range(g.n)]
        for u, v in g.edges:
            self.nbrs[u].add(v)
            self.nbrs[v].add(u)
        # high degree first; vertex 0 of this order is pinned to color 0
        self.order = sorted(range(g.n), key=lambda v: (-len(self.nbrs[v]), v))
        self.colors = [-1] * g.n
        self.sizes = [0] * k
        self.equitable = equitable
        self.c1 = g.n // k
        self.c2 = self.c1 if g.n % k == 0 else self.c1 + 1
        self.big_allowed = g.n - k * self.c1 if self.c1 != self.c2 else k
        self.big = 0
        self.nodes = 0

    def _feasible_sizes(self, placed: int) -> bool:
        remaining = self.n - placed
        deficit = sum(max(0, self.c1 - s) for s in self.sizes)
        return deficit <= remaining

    def run(self) -> list[int] | None:
        return self._extend(0, 0)

    def _extend(self, pos: int, used: int) -> list[int] | None:
        self.nodes += 1
        if pos == self.n:
            if self.equitable and any(s < self.c1 for s in self.sizes):
                return None
            return list(self.colors)
        v = self.order[pos]
        forbidden = {self.colors[u] for u in self.nbrs[v]}
        # symmetry breaking: at most one brand-new color per branch
        for col in range(min(used + 1, self.k)):
            if col in forbidden:
                continue
            if self.equitable:
                if self.sizes[col] >= self.c2:
                    continue
                grows_big = self.c1 != self.c2 and self.sizes[col] + 1 == self.c2
                if grows_big and self.big >= self.big_allowed:
                    continue
            self.colors[v] = col
            self.sizes[col] += 1
            if self.equitable and self.c1 != self.c2 and self.sizes[col] == self.c2:
                self.big += 1
            ok = not self.equitable or self._feasible_sizes(pos + 1)
            result = self._extend(pos + 1, max(used, col + 1)) if ok else None
            if self.equitable and self.c1 != self.c2 and self.sizes[col] == self.c2:
                self.big -= 1
            self.sizes[col] -= 1
            self.colors[v] = -1
            if result is not None:
                return result
        return None


def k_colorable(g: Graph, k: int, mode: Mode | str = Mode.GCP) -> tuple[list[int] | None, int]:
    """Exhaustive search for a legal (equitable in ECP mode) k-coloring."""
    search = _Search(g, k, Mode(mode) is Mode.ECP)
    if Mode(mode) is Mode.ECP and k > g.n:
        return None, 0
    return search.run(), search.nodes


def exact_chromatic(g: Graph, mode: Mode | str = Mode.GCP, max_n: int = DEFAULT_MAX_N) -> ExactResult:
    """Smallest k admitting a legal (equitable) k-coloring, by exhaustive search.

    Equitable colorability is not monotone in k, so every k below the
    returned value has been refuted individually.
    """
    mode = Mode(mode)
    if g.n > max_n:
        raise InstanceTooLarge(f"n={g.n} exceeds oracle limit {max_n}")
    explored = 0
    for k in range(1, g.n + 1):
        witness, nodes = k_colorable(g, k, mode)
        explored += nodes
        if witness is not None:
            return ExactResult(mode, k, Coloring.of(witness, k), explored)
    raise AssertionError("n colors always suffice")  # pragma: no cover


# ---------------------------------------------------------------------------
# loop transcriptions of the tensor formulas


def ref_matmul_broadcast(a, s):
    a, s = _tolist(a), _tolist(s)
    D, n, k = len(s), len(s[0]), len(s[0][0])
    return [
        [[sum(a[i][m] * s[d][m][j] for m in range(n)) for j in range(k)] for i in range(n)]
        for d in range(D)
    ]


def ref_association(s):
    s = _tolist(s)
    D, n, k = len(s), len(s[0]), len(s[0][0])
    return [
        [[sum(s[d][i][l] * s[d][j][l] for l in range(k)) for j in range(n)] for i in range(n)]
        for d in range(D)
    ]


def ref_color_conflicts(a, s):
    a = _tolist(a)
    m = ref_association(s)
    out = []
    for md in m:
        total = 0
        for i in range(len(a)):
            for j in range(len(a)):
                total += a[i][j] * md[i][j]
        out.append(total / 2)
    return out


def ref_equity(s, n, k):
    s = _tolist(s)
    c1 = n // k
    c2 = c1 if n % k == 0 else c1 + 1
    out = []
    for sd in s:
        total = 0
        for l in range(k):
            size = sum(sd[i][l] for i in range(n))
            total += min(abs(size - c1), abs(size - c2))
        out.append(total)
    return out


def ref_group_concentration(s):
    m = ref_association(s)
    n = len(m[0])
    return [[sum(md[i][j] for md in m) for j in range(n)] for i in range(n)]


def ref_kappa(a, mt, alpha):
    a, mt = _tolist(a), _tolist(mt)
    n = len(a)
    return sum(a[i][j] * mt[i][j] ** alpha for i in range(n) for j in range(n))


def ref_varpi(a, mt, beta):
    a, mt = _tolist(a), _tolist(mt)
    n = len(a)
    return sum((1 - a[i][j]) * mt[i][j] ** beta for i in range(n) for j in range(n))


def ref_equity_gradient(s, n, k):
    s = _tolist(s)
    c1 = n // k
    c2 = c1 if n % k == 0 else c1 + 1
    out = []
    for sd in s:
        rows = []
        sizes = [sum(sd[i][j] for i in range(n)) for j in range(k)]
        for _ in range(n):
            row = []
            for j in range(k):
                if sizes[j] == c1 or sizes[j] == c2:
                    row.append(0)
                elif sizes[j] > c2:
                    row.append(1)
                else:
                    row.append(-1)
            rows.append(row)
        out.append(rows)
    return out


def ref_loss_gradient(a, s, mt, lam, mu, nu, alpha, beta, t, ecp=False):
    """Entry-wise transcription of grad_S L(t)."""
    a, s, mt = _tolist(a), _tolist(s), _tolist(mt)
    D, n, k = len(s), len(s[0]), len(s[0][0])
    eq = ref_equity_gradient(s, n, k) if ecp else None
    out = []
    for d in range(D):
        rows = []
        for i in range(n):
            row = []
            for j in range(k):
                first = sum(a[i][m] * s[d][m][j] for m in range(n))
                pen = sum(a[i][m] * mt[i][m] ** (alpha - 1) * s[d][m][j] for m in range(n))
                bon = sum((1 - a[i][m]) * mt[i][m] ** (beta - 1) * s[d][m][j] for m in range(n))
                value = first + 2 * alpha * lam * t * pen - 2 * beta * mu * t * bon
                if ecp:
                    value += nu * t * eq[d][i][j]
                row.append(value)
            rows.append(row)
        out.append(rows)
    return out


def ref_softmax(w):
    w = _tolist(w)
    out = []
    for wd in w:
        rows = []
        for row in wd:
            top = max(row)
            e = [math.exp(x - top) for x in row]
            z = sum(e)
            rows.append([x / z for x in e])
        out.append(rows)
    return out


def ref_st_gradient(w, grad_s):
    """Per-entry form: s_j g_j - s_j sum_l s_l g_l."""
    sh = ref_softmax(w)
    grad_s = _tolist(grad_s)
    out = []
    for d in range(len(sh)):
        rows = []
        for i in range(len(sh[d])):
            k = len(sh[d][i])
            inner = sum(sh[d][i][l] * grad_s[d][i][l] for l in range(k))
            rows.append([sh[d][i][j] * grad_s[d][i][j] - sh[d][i][j] * inner for j in range(k)])
        out.append(rows)
    return out


def ref_st_gradient_chain_rule(w, grad_s):
    """Chain rule with the explicit softmax Jacobian s_l (delta_jl - s_j)."""
    sh = ref_softmax(w)
    grad_s = _tolist(grad_s)
    out = []
    for d in range(len(sh)):
        rows = []
        for i in range(len(sh[d])):
            k = len(sh[d][i])
            row = []
            for j in range(k):
                total = 0.0
                for l in range(k):
                    jac = sh[d][i][l] * ((1.0 if j == l else 0.0) - sh[d][i][j])
                    total += jac * grad_s[d][i][l]
                row.append(total)
            rows.append(row)
        out.append(rows)
    return out

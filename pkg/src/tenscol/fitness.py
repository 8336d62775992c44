"""Population fitness, penalty/bonus terms and the loss gradient w.r.t. S.

All functions take a one-hot solution tensor ``s`` of shape (D, n, k) and a
dense adjacency matrix shared by the whole population.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernel
from .graph import Graph, Mode, equity_bounds


@dataclass(frozen=True)
class LossParams:
    lam: float = 1e-5
    mu: float = 1e-6
    nu: float = 0.0
    alpha: float = 2.5
    beta: float = 1.2
    t: int = 0

    def __post_init__(self) -> None:
        if self.alpha <= 1 or self.beta <= 1:
            raise ValueError(f"alpha and beta must exceed 1 (got {self.alpha}, {self.beta})")
        if min(self.lam, self.mu, self.nu) < 0:
            raise ValueError("lambda, mu and nu must be non-negative")
        if self.t < 0:
            raise ValueError("iteration counter must be non-negative")


@dataclass(frozen=True)
class FitnessVector:
    color_conflicts: np.ndarray
    equity_violation: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.color_conflicts + self.equity_violation

    def best(self) -> int:
        return int(np.argmin(self.total))


def _adjacency(g: Graph | np.ndarray) -> np.ndarray:
    return g.adjacency if isinstance(g, Graph) else np.asarray(g)


def check_one_hot(s: np.ndarray) -> None:
    if s.ndim != 3:
        raise kernel.ShapeError(f"expected (D, n, k) solutions, got {s.shape}")
    if not (np.all((s == 0) | (s == 1)) and np.all(s.sum(axis=-1) == 1)):
        raise ValueError("solution tensor is not one-hot along the color axis")


def association_tensor(s: np.ndarray) -> np.ndarray:
    """m[d, i, j] = 1 iff i and j share a color in solution d."""
    check_one_hot(s)
    return kernel.batched_dot(s)


def conflict_fitness(g: Graph | np.ndarray, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Conflict tensor C = A (.) M and per-solution conflict counts (1/2 sum C)."""
    a = _adjacency(g)
    if m.shape[1:] != a.shape:
        raise kernel.ShapeError(f"association tensor {m.shape} vs adjacency {a.shape}")
    c = kernel.multiply(m, a.astype(m.dtype))
    doubled = np.rint(kernel.reduce_sum(c, (1, 2))).astype(np.int64)
    return c, doubled // 2


def group_sizes(s: np.ndarray) -> np.ndarray:
    """(D, k) integer count of vertices per color."""
    return np.rint(s.sum(axis=1)).astype(np.int64)


def equity_fitness(s: np.ndarray, n: int, k: int) -> np.ndarray:
    c1, c2 = equity_bounds(n, k)
    sizes = group_sizes(s)
    return np.minimum(np.abs(sizes - c1), np.abs(sizes - c2)).sum(axis=1)


def equity_gradient(s: np.ndarray, n: int, k: int) -> np.ndarray:
    """+1 on colors larger than c2, -1 on colors smaller than c1, 0 otherwise."""
    c1, c2 = equity_bounds(n, k)
    sizes = group_sizes(s)
    per_color = np.where(sizes > c2, 1, np.where(sizes < c1, -1, 0)).astype(s.dtype)
    return np.broadcast_to(per_color[:, None, :], s.shape)


def group_concentration(m: np.ndarray) -> np.ndarray:
    """Population-wide count of solutions grouping i with j."""
    return kernel.reduce_sum(m, 0)


def group_concentration_from_solutions(s: np.ndarray) -> np.ndarray:
    """Same as ``group_concentration(association_tensor(s))`` as one (n, Dk) GEMM."""
    d, n, k = s.shape
    flat = np.ascontiguousarray(s.transpose(1, 0, 2)).reshape(n, d * k)
    return flat @ flat.T


def penalty_bonus_values(
    g: Graph | np.ndarray, mt: np.ndarray, p: LossParams
) -> tuple[float, float]:
    """kappa = sum A (.) Mt^alpha and varpi = sum (J - A) (.) Mt^beta.

    Diagnostics only; the solver works with their gradients.
    """
    a = _adjacency(g).astype(np.float64)
    mt = np.asarray(mt, dtype=np.float64)
    kappa = float(np.sum(a * kernel.power(mt, p.alpha)))
    varpi = float(np.sum((1.0 - a) * kernel.power(mt, p.beta)))
    return kappa, varpi


def gradient_matrix(a: np.ndarray, mt: np.ndarray, p: LossParams, dtype=None) -> np.ndarray:
    """The (n, n) operator G with grad_S (without equity) = G . S.

    G = A + 2 alpha lam t (A (.) Mt^(alpha-1)) - 2 beta mu t ((J - A) (.) Mt^(beta-1)).
    Linearity lets the three products collapse into one.
    """
    dtype = dtype or mt.dtype
    af = a.astype(np.float64)
    g = af.copy()
    if p.t and p.lam:
        g += (2.0 * p.alpha * p.lam * p.t) * af * kernel.power(mt.astype(np.float64), p.alpha - 1)
    if p.t and p.mu:
        g -= (2.0 * p.beta * p.mu * p.t) * (1.0 - af) * kernel.power(mt.astype(np.float64), p.beta - 1)
    return g.astype(dtype)


def loss_gradient_wrt_s(
    g: Graph | np.ndarray,
    s: np.ndarray,
    mt: np.ndarray,
    p: LossParams,
    mode: Mode | str = Mode.GCP,
    validate_input: bool = True,
) -> np.ndarray:
    if validate_input:
        check_one_hot(s)
    a = _adjacency(g)
    d, n, k = s.shape
    if a.shape != (n, n) or mt.shape != (n, n):
        raise kernel.ShapeError(f"adjacency {a.shape} / Mt {mt.shape} vs solutions {s.shape}")
    grad = kernel.broadcast_matmul(gradient_matrix(a, mt, p, dtype=s.dtype), s)
    if Mode(mode) is Mode.ECP and p.nu and p.t:
        grad = grad + (p.nu * p.t) * equity_gradient(s, n, k)
    return grad


def evaluate(
    g: Graph, s: np.ndarray, mode: Mode | str = Mode.GCP
) -> tuple[np.ndarray, FitnessVector]:
    """Association tensor plus fitness vector for a population (reference path)."""
    m = association_tensor(s)
    _, conflicts = conflict_fitness(g, m)
    d, n, k = s.shape
    if Mode(mode) is Mode.ECP:
        eq = equity_fitness(s, n, k)
    else:
        eq = np.zeros(d, dtype=np.int64)
    return m, FitnessVector(conflicts, eq)

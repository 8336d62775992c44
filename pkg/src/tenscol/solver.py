"""Population-based gradient descent weight learning for k-coloring.

One iteration:

1. decode ``S = one_hot(argmax(W))``;
2. evaluate conflicts (and equity in ECP mode); stop if any solution is legal;
3. build the group concentration matrix and the loss gradient w.r.t. ``S``;
4. push it through the softmax Jacobian (straight-through) and take a plain
   gradient step on ``W``; every ``nb_iter`` iterations divide ``W`` by ``rho``.
"""

from __future__ import annotations

import contextlib
import dataclasses
import enum
import hashlib
import logging
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import fastpath, kernel
from .fitness import (
    FitnessVector,
    LossParams,
    evaluate,
    gradient_matrix,
    group_concentration,
    loss_gradient_wrt_s,
)
from .graph import Coloring, Graph, Mode, equity_bounds, greedy_upper_bound, validate

logger = logging.getLogger(__name__)

PRNG_ID = "numpy.random.Generator(PCG64).standard_normal[ziggurat]"
RHO_CHOICES = (1.0, 2.0, 10.0, 100.0, 200.0)
DEFAULT_MAX_WEIGHT_BYTES = 2 * 1024**3


class SizingError(MemoryError):
    pass


class Status(str, enum.Enum):
    SOLVED = "solved"
    BUDGET_EXHAUSTED = "budget_exhausted"


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters; defaults are the GCP baseline, see :meth:`defaults`."""

    k: int
    mode: Mode = Mode.GCP
    D: int = 200
    sigma0: float = 0.01
    eta: float = 1e-3
    nb_iter: int = 5
    rho: float = 10.0
    alpha: float = 2.5
    beta: float = 1.2
    lam: float = 1e-5
    mu: float = 1e-6
    nu: float = 0.0
    max_iter: int = 2_000_000
    seed: int = 0
    trace_stride: int = 100
    time_limit: float | None = None
    deterministic: bool = False
    dtype: str = "float32"
    max_weight_bytes: int = DEFAULT_MAX_WEIGHT_BYTES

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.D < 1 or self.nb_iter < 1 or self.max_iter < 0 or self.trace_stride < 1:
            raise ValueError("D, nb_iter and trace_stride must be positive")
        if self.rho < 1:
            raise ValueError("rho must be >= 1")
        if self.eta < 0 or self.sigma0 <= 0:
            raise ValueError("eta must be >= 0 and sigma0 > 0")
        if self.mode is Mode.GCP and self.nu:
            logger.warning("nu=%g with mode gcp: the equity term is ignored", self.nu)
        LossParams(self.lam, self.mu, self.nu, self.alpha, self.beta)

    @classmethod
    def defaults(cls, mode: Mode | str, k: int, **overrides) -> "SolverConfig":
        mode = Mode(mode)
        base = {"mu": 1e-6, "nu": 0.0} if mode is Mode.GCP else {"mu": 0.0, "nu": 1e-5}
        base.update(overrides)
        return cls(k=k, mode=mode, **base)

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def loss_params(self, t: int) -> LossParams:
        nu = self.nu if self.mode is Mode.ECP else 0.0
        return LossParams(self.lam, self.mu, nu, self.alpha, self.beta, t)

    def as_record(self) -> dict:
        rec = dataclasses.asdict(self)
        rec["mode"] = self.mode.value
        return rec


@dataclass
class TraceRecord:
    t: int
    best_color: int
    best_equity: int
    min_total: int
    wall: float


@dataclass
class RunTrace:
    header: dict = field(default_factory=dict)
    records: list[TraceRecord] = field(default_factory=list)

    def append(self, rec: TraceRecord) -> None:
        if self.records and rec.t <= self.records[-1].t:
            raise ValueError("trace iterations must be strictly increasing")
        self.records.append(rec)

    def fitness_rows(self) -> list[tuple[int, int, int, int]]:
        """Trace content without wall-clock times (what determinism compares)."""
        return [(r.t, r.best_color, r.best_equity, r.min_total) for r in self.records]


@dataclass
class SolveOutcome:
    status: Status
    best_coloring: Coloring
    best_fitness: int
    iterations_used: int
    seconds: float
    trace: RunTrace
    weights_digest: str = ""

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED


@dataclass
class StepInfo:
    solved: bool
    best: int
    colors: np.ndarray


def _dtype(cfg: SolverConfig) -> np.dtype:
    return np.dtype(cfg.dtype)


def init_weights(cfg: SolverConfig, n: int) -> np.ndarray:
    """D x n x k tensor of N(0, sigma0) draws from a PCG64 stream seeded by ``cfg.seed``."""
    dtype = _dtype(cfg)
    nbytes = cfg.D * n * cfg.k * dtype.itemsize
    if nbytes > cfg.max_weight_bytes:
        raise SizingError(
            f"weight tensor needs {nbytes / 2**20:.0f} MiB (D={cfg.D}, n={n}, k={cfg.k}); "
            f"budget is {cfg.max_weight_bytes / 2**20:.0f} MiB, reduce D"
        )
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    w = rng.standard_normal((cfg.D, n, cfg.k), dtype=np.float64) * cfg.sigma0
    return w.astype(dtype)


def st_gradient(w: np.ndarray, grad_s: np.ndarray) -> np.ndarray:
    """Straight-through gradient: S_hat (.) (grad_S - (S_hat (.) grad_S) . J)."""
    if w.shape != grad_s.shape:
        raise kernel.ShapeError(f"weights {w.shape} vs grad_S {grad_s.shape}")
    s_hat = kernel.softmax_lastaxis(w)
    inner = (s_hat * grad_s).sum(axis=-1, keepdims=True)
    return s_hat * (grad_s - inner)


class Workspace:
    """Scratch buffers reused across iterations for one (D, n, k, dtype)."""

    def __init__(self, g: Graph, cfg: SolverConfig):
        d, n, k = cfg.D, g.n, cfg.k
        dtype = _dtype(cfg)
        self.shape = (d, n, k, dtype)
        self.eu, self.ev = g.edge_index
        self.c1, self.c2 = equity_bounds(n, k)
        self.colors = np.empty((d, n), dtype=np.int64)
        self.rowmax = np.empty((d, n), dtype=dtype)
        self.conflicts = np.empty(d, dtype=np.int64)
        self.equity = np.empty(d, dtype=np.int64)
        self.sizes = np.empty((d, k), dtype=np.int64)
        self.mt = np.empty((n, n), dtype=np.float64)
        self.grad_s = np.empty((d, n, k), dtype=dtype)
        self.numer = np.empty((d, n, k), dtype=dtype)
        self.shift = np.zeros((d, k), dtype=dtype)

    def fits(self, g: Graph, cfg: SolverConfig) -> bool:
        return self.shape == (cfg.D, g.n, cfg.k, _dtype(cfg))


def step(
    w: np.ndarray, g: Graph, cfg: SolverConfig, t: int, ws: Workspace | None = None
) -> tuple[np.ndarray, FitnessVector, StepInfo]:
    """One iteration. ``w`` is updated in place and returned.

    If some solution of the decoded population is already legal the weights
    are left untouched and ``info.solved`` is set.
    """
    if t >= cfg.max_iter:
        raise ValueError(f"t={t} is past max_iter={cfg.max_iter}")
    if w.shape != (cfg.D, g.n, cfg.k):
        raise kernel.ShapeError(f"weights {w.shape} vs (D, n, k)=({cfg.D}, {g.n}, {cfg.k})")
    if ws is None or not ws.fits(g, cfg):
        ws = Workspace(g, cfg)
    ecp = cfg.mode is Mode.ECP

    fastpath.decode(w, ws.colors, ws.rowmax)
    fastpath.fitness(
        ws.colors, ws.eu, ws.ev, cfg.k, ws.c1, ws.c2, ecp, ws.conflicts, ws.sizes, ws.equity
    )
    fit = FitnessVector(ws.conflicts.copy(), ws.equity.copy())
    best = fit.best()
    if fit.total[best] == 0:
        return w, fit, StepInfo(True, best, ws.colors.copy())

    p = cfg.loss_params(t)
    fastpath.concentration(ws.colors, cfg.k, ws.mt)
    gmat = np.ascontiguousarray(gradient_matrix(g.adjacency, ws.mt, p, dtype=w.dtype))
    fastpath.gather_product(gmat, ws.colors, cfg.k, ws.grad_s)
    if ecp and p.nu and t:
        signs = np.where(ws.sizes > ws.c2, 1.0, np.where(ws.sizes < ws.c1, -1.0, 0.0))
        ws.shift[:] = (p.nu * t) * signs
    else:
        ws.shift[:] = 0

    fastpath.softmax_numerators(w, ws.rowmax, ws.numer)
    smooth = t > 0 and t % cfg.nb_iter == 0
    divisor = cfg.rho if smooth else 1.0
    fastpath.st_update(w, ws.numer, ws.grad_s, ws.shift, cfg.eta, divisor)
    if not np.isfinite(w).all():
        raise kernel.NonFiniteError(
            f"non-finite weights after update at t={t}: "
            f"max|grad_S|={float(np.abs(ws.grad_s).max()):.3g}, min fitness={int(fit.total.min())}"
        )
    return w, fit, StepInfo(False, best, ws.colors.copy())


def reference_step(
    w: np.ndarray, g: Graph, cfg: SolverConfig, t: int
) -> tuple[np.ndarray, FitnessVector, StepInfo]:
    """Same iteration written with the dense tensor kernels (one-hot S, M, Mt)."""
    s = kernel.argmax_onehot(w)
    m, fit = evaluate(g, s, cfg.mode)
    colors = kernel.argmax_indices(w)
    best = fit.best()
    if fit.total[best] == 0:
        return w, fit, StepInfo(True, best, colors)
    mt = group_concentration(m)
    grad_s = loss_gradient_wrt_s(g, s, mt, cfg.loss_params(t), cfg.mode)
    w = kernel.subtract(w, kernel.scale(st_gradient(w, grad_s), cfg.eta))
    if t > 0 and t % cfg.nb_iter == 0:
        w = kernel.scale(w, 1.0 / cfg.rho) if cfg.rho != 1 else w
    return w, fit, StepInfo(False, best, colors)


def _thread_guard(deterministic: bool):
    if not deterministic:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=1)


def solve_fixed_k(g: Graph, cfg: SolverConfig) -> SolveOutcome:
    trace = RunTrace(header={"config": cfg.as_record(), "instance": g.name, "n": g.n, "prng": PRNG_ID})
    start = time.perf_counter()
    best_total = None
    best_colors = None
    best_t = 0
    t = 0
    status = Status.BUDGET_EXHAUSTED
    with _thread_guard(cfg.deterministic):
        w = init_weights(cfg, g.n)
        ws = Workspace(g, cfg)
        while t < cfg.max_iter:
            w, fit, info = step(w, g, cfg, t, ws)
            total = int(fit.total[info.best])
            if best_total is None or total < best_total:
                best_total, best_colors, best_t = total, info.colors[info.best].copy(), t
            if info.solved or t % cfg.trace_stride == 0:
                trace.append(
                    TraceRecord(
                        t,
                        int(fit.color_conflicts[info.best]),
                        int(fit.equity_violation[info.best]),
                        total,
                        time.perf_counter() - start,
                    )
                )
            if info.solved:
                status = Status.SOLVED
                break
            t += 1
            if cfg.time_limit is not None and time.perf_counter() - start > cfg.time_limit:
                break
    elapsed = time.perf_counter() - start
    if best_colors is None:  # max_iter == 0
        best_colors = kernel.argmax_indices(init_weights(cfg, g.n))[0]
        best_total = -1
    coloring = Coloring.of(best_colors, cfg.k)
    if status is Status.SOLVED:
        report = validate(g, coloring, cfg.mode)
        if not report.legal:
            raise AssertionError(f"decoded solution failed validation: {report}")
    elif best_total >= 0:
        report = validate(g, coloring, cfg.mode)
        best_total = report.conflict_count + report.equity_violation
    digest = hashlib.sha256(np.ascontiguousarray(w).tobytes()).hexdigest()
    logger.info(
        "%s k=%d seed=%d: %s after %d iterations (best fitness %d at t=%d, %.1fs)",
        g.name or "graph", cfg.k, cfg.seed, status.value, t, best_total, best_t, elapsed,
    )
    return SolveOutcome(status, coloring, best_total, t, elapsed, trace, digest)


@dataclass
class SweepLevel:
    k: int
    outcomes: list[SolveOutcome]

    @property
    def successes(self) -> int:
        return sum(o.solved for o in self.outcomes)

    @property
    def runs(self) -> int:
        return len(self.outcomes)

    @property
    def mean_success_seconds(self) -> float | None:
        times = [o.seconds for o in self.outcomes if o.solved]
        return sum(times) / len(times) if times else None

    def as_record(self) -> dict:
        return {
            "k": self.k,
            "successes": self.successes,
            "runs": self.runs,
            "sr": f"{self.successes}/{self.runs}",
            "mean_time_s": self.mean_success_seconds,
        }


@dataclass
class SweepReport:
    start_k: int
    levels: list[SweepLevel]

    @property
    def best_k(self) -> int | None:
        solved = [lvl.k for lvl in self.levels if lvl.successes]
        return min(solved) if solved else None

    def best_level(self) -> SweepLevel | None:
        for lvl in self.levels:
            if lvl.k == self.best_k:
                return lvl
        return None

    def best_coloring(self) -> Coloring | None:
        lvl = self.best_level()
        if lvl is None:
            return None
        return next(o.best_coloring for o in lvl.outcomes if o.solved)


def k_sweep(
    g: Graph,
    base_cfg: SolverConfig,
    seeds: Sequence[int] | Iterable[int],
    start_k: int | None = None,
) -> SweepReport:
    """Solve k-COL for decreasing k until every seed fails at some k."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("k_sweep needs at least one seed")
    if start_k is None:
        start_k = greedy_upper_bound(g, seed=seeds[0]).colors_used
    levels: list[SweepLevel] = []
    k = start_k
    while k >= 1:
        outcomes = [solve_fixed_k(g, base_cfg.replace(k=k, seed=s)) for s in seeds]
        level = SweepLevel(k, outcomes)
        levels.append(level)
        logger.info("k=%d: SR %d/%d", k, level.successes, level.runs)
        if not level.successes:
            break
        k -= 1
    return SweepReport(start_k, levels)

"""Dense batched tensor arithmetic used by the solver.

Tensors are plain numpy arrays shaped (D, n, k) or (D, n, n); matrices are
(n, n) or (n, k). Only the shapes in the solver's call graph are supported,
so every entry point checks them instead of relying on numpy broadcasting.
"""

from __future__ import annotations

import numpy as np

DEFAULT_DTYPE = np.float32
VERIFY_DTYPE = np.float64


class ShapeError(ValueError):
    pass


class NonFiniteError(FloatingPointError):
    pass


def _require_rank(x: np.ndarray, rank: int, name: str) -> None:
    if x.ndim != rank:
        raise ShapeError(f"{name}: expected rank {rank}, got shape {x.shape}")


def check_finite(x: np.ndarray, name: str = "tensor") -> np.ndarray:
    if not np.all(np.isfinite(x)):
        bad = int(np.size(x) - np.count_nonzero(np.isfinite(x)))
        raise NonFiniteError(f"{name}: {bad} non-finite entries")
    return x


def batched_dot(x: np.ndarray) -> np.ndarray:
    """x . x' over the last axis: out[d, i, j] = sum_l x[d, i, l] x[d, j, l]."""
    _require_rank(x, 3, "batched_dot")
    return check_finite(np.matmul(x, x.transpose(0, 2, 1)), "batched_dot")


def broadcast_matmul(a: np.ndarray, s: np.ndarray) -> np.ndarray:
    """out[d] = a @ s[d] with ``a`` shared across the population axis.

    The population is folded into the column axis so the whole product is a
    single (n, n) x (n, D*k) GEMM; ``a`` is never replicated D times.
    """
    _require_rank(a, 2, "broadcast_matmul/a")
    _require_rank(s, 3, "broadcast_matmul/s")
    d, n, k = s.shape
    if a.shape != (n, n):
        raise ShapeError(f"broadcast_matmul: a {a.shape} does not conform to s {s.shape}")
    flat = np.ascontiguousarray(s.transpose(1, 0, 2)).reshape(n, d * k)
    out = (a.astype(s.dtype, copy=False) @ flat).reshape(n, d, k).transpose(1, 0, 2)
    return check_finite(np.ascontiguousarray(out), "broadcast_matmul")


def softmax_lastaxis(w: np.ndarray) -> np.ndarray:
    check_finite(w, "softmax input")
    shifted = w - w.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    e /= e.sum(axis=-1, keepdims=True)
    return e


def argmax_indices(w: np.ndarray) -> np.ndarray:
    """Color index per (d, i); numpy's argmax returns the first maximum."""
    return np.argmax(w, axis=-1)


def one_hot(idx: np.ndarray, k: int, dtype=DEFAULT_DTYPE) -> np.ndarray:
    out = np.zeros(idx.shape + (k,), dtype=dtype)
    np.put_along_axis(out, idx[..., None], 1, axis=-1)
    return out


def argmax_onehot(w: np.ndarray) -> np.ndarray:
    return one_hot(argmax_indices(w), w.shape[-1], dtype=w.dtype)


def multiply(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if x.shape[-2:] != y.shape[-2:]:
        raise ShapeError(f"multiply: {x.shape} vs {y.shape}")
    return check_finite(x * y, "multiply")


def subtract(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if x.shape != y.shape:
        raise ShapeError(f"subtract: {x.shape} vs {y.shape}")
    return check_finite(x - y, "subtract")


def scale(x: np.ndarray, factor: float) -> np.ndarray:
    with np.errstate(over="ignore"):
        out = x * factor
    return check_finite(out, "scale")


def power(x: np.ndarray, exponent: float) -> np.ndarray:
    """Element-wise power; 0**p == 0 for p > 0, negative bases need integer p."""
    x = np.asarray(x)
    if float(exponent) != int(exponent) and np.any(x < 0):
        raise ValueError("negative base with fractional exponent")
    with np.errstate(divide="ignore"):
        out = np.power(x, exponent)
    return check_finite(out, "power")


def reduce_sum(x: np.ndarray, axes: int | tuple[int, ...]) -> np.ndarray:
    """Sum over 0-based axes; ``axes=(1, 2)`` on (D, n, n) gives one value per solution."""
    if isinstance(axes, int):
        axes = (axes,)
    for ax in axes:
        if not -x.ndim <= ax < x.ndim:
            raise ShapeError(f"reduce_sum: axis {ax} invalid for rank {x.ndim}")
    if len(set(a % x.ndim for a in axes)) != len(axes):
        raise ShapeError(f"reduce_sum: repeated axes {axes}")
    return x.sum(axis=tuple(axes))

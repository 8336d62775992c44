"""Compiled kernels for the solver's inner loop.

They compute the same quantities as :mod:`tenscol.kernel` and
:mod:`tenscol.fitness` but work on the color-index form of ``S`` (one
integer per (d, i)) instead of the dense one-hot tensor, which turns the
O(D n^2 k) products into O(D n^2) gathers. Tests pin them against the
dense implementations.
"""

from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True)
def decode(w, colors, rowmax):
    """Argmax (first maximum wins) and row maximum for every (d, i)."""
    D, n, k = w.shape
    for d in range(D):
        for i in range(n):
            best = 0
            bv = w[d, i, 0]
            for j in range(1, k):
                if w[d, i, j] > bv:
                    bv = w[d, i, j]
                    best = j
            colors[d, i] = best
            rowmax[d, i] = bv


@nb.njit(cache=True)
def fitness(colors, eu, ev, k, c1, c2, equity, conflicts, sizes, eq):
    D, n = colors.shape
    for d in range(D):
        total = 0
        for e in range(eu.shape[0]):
            if colors[d, eu[e]] == colors[d, ev[e]]:
                total += 1
        conflicts[d] = total
        for j in range(k):
            sizes[d, j] = 0
        for i in range(n):
            sizes[d, colors[d, i]] += 1
        dev = 0
        if equity:
            for j in range(k):
                a = abs(sizes[d, j] - c1)
                b = abs(sizes[d, j] - c2)
                dev += a if a < b else b
        eq[d] = dev


@nb.njit(cache=True)
def concentration(colors, k, mt):
    """mt[i, j] = number of solutions in which i and j share a color."""
    D, n = colors.shape
    mt[:, :] = 0
    order = np.empty(n, np.int64)
    start = np.empty(k + 1, np.int64)
    fill = np.empty(k, np.int64)
    for d in range(D):
        start[:] = 0
        for i in range(n):
            start[colors[d, i] + 1] += 1
        for j in range(k):
            start[j + 1] += start[j]
        for j in range(k):
            fill[j] = start[j]
        for i in range(n):
            c = colors[d, i]
            order[fill[c]] = i
            fill[c] += 1
        for j in range(k):
            for a in range(start[j], start[j + 1]):
                u = order[a]
                for b in range(start[j], start[j + 1]):
                    mt[u, order[b]] += 1


@nb.njit(cache=True)
def gather_product(gmat, colors, k, out):
    """out[d, i, j] = sum over m colored j in solution d of gmat[i, m] (gmat symmetric)."""
    D, n = colors.shape
    out[:, :, :] = 0
    for d in range(D):
        for m in range(n):
            c = colors[d, m]
            for i in range(n):
                out[d, i, c] += gmat[m, i]


@nb.njit(cache=True)
def st_update(w, e, grad_s, color_shift, eta, divisor):
    """Finish softmax, apply the straight-through step and optional smoothing in place.

    ``e`` holds exp(w - rowmax) on entry; ``color_shift[d, j]`` is added to
    every vertex's gradient for color j (the equity term).
    """
    D, n, k = w.shape
    inv_div = 1.0 / divisor
    for d in range(D):
        for i in range(n):
            z = 0.0
            for j in range(k):
                z += e[d, i, j]
            inner = 0.0
            for j in range(k):
                inner += e[d, i, j] * (grad_s[d, i, j] + color_shift[d, j])
            inv_z = 1.0 / z
            inner *= inv_z
            scale = eta * inv_z
            for j in range(k):
                g = grad_s[d, i, j] + color_shift[d, j]
                w[d, i, j] = (w[d, i, j] - scale * e[d, i, j] * (g - inner)) * inv_div


def softmax_numerators(w: np.ndarray, rowmax: np.ndarray, out: np.ndarray) -> np.ndarray:
    np.subtract(w, rowmax[..., None], out=out)
    np.exp(out, out=out)
    return out

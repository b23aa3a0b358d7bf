"""Numeric kernels for the hot loops: scoring bags of features and SGD training.

Each kernel has a numba-jitted implementation and a pure-numpy fallback.
Setting the environment variable ``FLIPSCOPE_NO_NUMBA=1`` (before import)
forces the fallback; the flag exists so the two paths can be benchmarked
against each other (see ``benchmarks/bench_kernels.py``).
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("FLIPSCOPE_NO_NUMBA", "").lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError("numba disabled via FLIPSCOPE_NO_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


def backend() -> str:
    """Name of the active kernel backend, "numba" or "numpy"."""
    return "numba" if HAS_NUMBA else "numpy"


def sigmoid(margins: np.ndarray) -> np.ndarray:
    """Numerically stable elementwise logistic function."""
    out = np.empty_like(margins, dtype=np.float64)
    pos = margins >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-margins[pos]))
    e = np.exp(margins[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _linear_scores_np(flat: np.ndarray, offsets: np.ndarray, weights: np.ndarray,
                      bias: float) -> np.ndarray:
    # Per-segment reduceat keeps each set's score independent of its batch
    # context (scoring must be a pure function of the set alone).
    n = offsets.shape[0] - 1
    sums = np.zeros(n)
    if flat.size:
        nonempty = np.diff(offsets) > 0
        starts = offsets[:-1][nonempty]
        sums[nonempty] = np.add.reduceat(weights[flat], starts)
    return sigmoid(bias + sums)


def _sgd_logistic_np(flat, offsets, labels, order, lr, l2, n_features):
    w = np.zeros(n_features, dtype=np.float64)
    b = 0.0
    epochs, n = order.shape
    losses = np.empty(epochs, dtype=np.float64)
    for ep in range(epochs):
        total = 0.0
        for k in range(n):
            i = order[ep, k]
            lo, hi = offsets[i], offsets[i + 1]
            m = b
            for j in range(lo, hi):
                m += w[flat[j]]
            y = labels[i]
            if m >= 0.0:
                p = 1.0 / (1.0 + np.exp(-m))
                loss = (1.0 - y) * m + np.log1p(np.exp(-m))
            else:
                e = np.exp(m)
                p = e / (1.0 + e)
                loss = -y * m + np.log1p(e)
            g = p - y
            b -= lr * g
            for j in range(lo, hi):
                f = flat[j]
                w[f] -= lr * (g + l2 * w[f])
            total += loss
        losses[ep] = total / n
    return w, b, losses


if HAS_NUMBA:

    @njit(cache=True)
    def _linear_scores_nb(flat, offsets, weights, bias):  # pragma: no cover - jitted
        n = offsets.shape[0] - 1
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            m = bias
            for j in range(offsets[i], offsets[i + 1]):
                m += weights[flat[j]]
            if m >= 0.0:
                out[i] = 1.0 / (1.0 + np.exp(-m))
            else:
                e = np.exp(m)
                out[i] = e / (1.0 + e)
        return out

    @njit(cache=True)
    def _sgd_logistic_nb(flat, offsets, labels, order, lr, l2, n_features):  # pragma: no cover
        w = np.zeros(n_features, dtype=np.float64)
        b = 0.0
        epochs, n = order.shape
        losses = np.empty(epochs, dtype=np.float64)
        for ep in range(epochs):
            total = 0.0
            for k in range(n):
                i = order[ep, k]
                lo, hi = offsets[i], offsets[i + 1]
                m = b
                for j in range(lo, hi):
                    m += w[flat[j]]
                y = labels[i]
                if m >= 0.0:
                    p = 1.0 / (1.0 + np.exp(-m))
                    loss = (1.0 - y) * m + np.log1p(np.exp(-m))
                else:
                    e = np.exp(m)
                    p = e / (1.0 + e)
                    loss = -y * m + np.log1p(e)
                g = p - y
                b -= lr * g
                for j in range(lo, hi):
                    f = flat[j]
                    w[f] -= lr * (g + l2 * w[f])
                total += loss
            losses[ep] = total / n
        return w, b, losses

    linear_scores = _linear_scores_nb
    sgd_logistic = _sgd_logistic_nb
else:
    linear_scores = _linear_scores_np
    sgd_logistic = _sgd_logistic_np


def pack_sets(sets) -> tuple[np.ndarray, np.ndarray]:
    """Flatten a sequence of index bags into (flat indices, segment offsets)."""
    offsets = np.zeros(len(sets) + 1, dtype=np.int64)
    for i, s in enumerate(sets):
        offsets[i + 1] = offsets[i] + len(s)
    flat = np.empty(offsets[-1], dtype=np.int64)
    pos = 0
    for s in sets:
        ln = len(s)
        flat[pos:pos + ln] = s
        pos += ln
    return flat, offsets

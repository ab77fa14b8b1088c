"""Uniform moving-average smoothing with edge-replicate padding."""

from __future__ import annotations

import numpy as np


def moving_average_kernel(k: int) -> np.ndarray:
    """The length-``k`` uniform window ``(1/k, ..., 1/k)``."""
    _check_window(k, None)
    return np.full(k, 1.0 / k)


def _check_window(k, length):
    if int(k) != k or k < 1 or k % 2 == 0:
        raise ValueError(f"window size must be a positive odd integer, got {k}")
    if length is not None and k > length:
        raise ValueError(f"window size {k} exceeds axis length {length}")


def _smooth_axis(x: np.ndarray, k: int, axis: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim < 2:
        raise ValueError(f"expected a (..., J, N) array, got shape {x.shape}")
    n = x.shape[axis]
    _check_window(k, n)
    if k == 1:
        return x.copy()
    half = k // 2
    pad = [(0, 0)] * x.ndim
    pad[axis] = (half, half)
    padded = np.pad(x, pad, mode="edge")
    # accumulate the k shifted views in a fixed order
    acc = np.zeros_like(x)
    for offset in range(k):
        acc += np.take(padded, np.arange(offset, offset + n), axis=axis)
    return acc / k


def temporal_smooth(x: np.ndarray, k: int) -> np.ndarray:
    """Moving average of every channel along time (the last axis)."""
    return _smooth_axis(x, k, axis=-1)


def spatial_smooth(x: np.ndarray, k: int) -> np.ndarray:
    """Moving average across channels (axis ``-2``) at every frame."""
    return _smooth_axis(x, k, axis=-2)


def both_axes_smooth(x: np.ndarray, k: int) -> np.ndarray:
    """Separable smoothing over time with ``k`` and over channels with ``min(k, J)``.

    The channel window is capped at the largest odd size that fits ``J``.
    """
    J = np.shape(x)[-2]
    kj = min(k, J if J % 2 else J - 1)
    return spatial_smooth(temporal_smooth(x, k), kj)

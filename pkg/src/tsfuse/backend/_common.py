"""Geometry helpers shared by the numba and numpy kernel backends."""
from __future__ import annotations

import numpy as np


def conv_out_size(size: int, kernel: int, stride: int, padding: int, dilation: int) -> int:
    eff = (kernel - 1) * dilation + 1
    out = (size + 2 * padding - eff) // stride + 1
    if out < 1:
        raise ValueError(
            f"convolution produces empty output (size={size}, kernel={kernel}, "
            f"stride={stride}, padding={padding}, dilation={dilation})"
        )
    return out


def pad_input(x: np.ndarray, padding: int) -> np.ndarray:
    if padding == 0:
        return np.ascontiguousarray(x)
    return np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))


def bilinear_coeffs(in_size: int, out_size: int, dtype) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Half-pixel source coordinates, clamped to the grid.

    Returns (lo, hi, frac): output pixel i interpolates between rows lo[i] and
    hi[i] with weight (1-frac[i]) and frac[i].
    """
    scale = in_size / out_size
    src = (np.arange(out_size, dtype=np.float64) + 0.5) * scale - 0.5
    src = np.clip(src, 0.0, in_size - 1)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, in_size - 1)
    frac = (src - lo).astype(dtype)
    return lo, hi, frac

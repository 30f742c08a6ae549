"""Kernel backend selection.

The hot kernels (conv2d forward/backward, bilinear resize) exist twice:
a numba-jitted implementation and a pure-numpy fallback. `TSFUSE_BACKEND`
picks one: "numba", "numpy", or "auto" (default: numba when importable).
"""
from __future__ import annotations

import os

from . import _numpy_kernels

_BACKENDS = {"numpy": _numpy_kernels}

try:
    from . import _numba_kernels

    _BACKENDS["numba"] = _numba_kernels
except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
    _numba_kernels = None

_active_name = None
_active = None


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def set_backend(name: str) -> None:
    global _active_name, _active
    if name == "auto":
        name = "numba" if "numba" in _BACKENDS else "numpy"
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    _active_name = name
    _active = _BACKENDS[name]


def backend_name() -> str:
    return _active_name


def get_kernels(name: str):
    """Explicit backend module lookup, used by the kernel benchmark."""
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; available: {available_backends()}")
    return _BACKENDS[name]


set_backend(os.environ.get("TSFUSE_BACKEND", "auto"))


def conv2d_forward(x, w, stride=1, padding=0, dilation=1):
    return _active.conv2d_forward(x, w, stride, padding, dilation)


def conv2d_input_grad(dout, w, x_shape, stride=1, padding=0, dilation=1):
    return _active.conv2d_input_grad(dout, w, x_shape, stride, padding, dilation)


def conv2d_weight_grad(dout, x, w_shape, stride=1, padding=0, dilation=1):
    return _active.conv2d_weight_grad(dout, x, w_shape, stride, padding, dilation)


def bilinear_resize(x, out_h, out_w):
    return _active.bilinear_resize(x, out_h, out_w)


def bilinear_resize_grad(dout, in_h, in_w):
    return _active.bilinear_resize_grad(dout, in_h, in_w)

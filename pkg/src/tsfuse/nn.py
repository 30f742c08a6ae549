"""Layers and the parameter container.

Parameters are created empty and filled by Module.initialize(seed): each
parameter is seeded from (seed, crc32(path)), so a submodule shared between
two model variants initializes identically regardless of what else exists.
"""
from __future__ import annotations

import zlib

import numpy as np

from . import functional as F
from .autograd import Tensor

DEFAULT_DTYPE = np.float32


class Parameter(Tensor):
    __slots__ = ("init_spec",)

    def __init__(self, shape, init_spec):
        super().__init__(np.zeros(shape, dtype=DEFAULT_DTYPE), requires_grad=True)
        self.init_spec = init_spec


def _fill(param: Parameter, rng: np.random.Generator, dtype):
    kind = param.init_spec[0]
    shape = param.data.shape
    if kind == "zeros":
        param.data = np.zeros(shape, dtype=dtype)
    elif kind == "ones":
        param.data = np.ones(shape, dtype=dtype)
    elif kind == "he_fanin":
        fan = param.init_spec[1]
        std = np.sqrt(2.0 / fan)
        param.data = (rng.standard_normal(shape) * std).astype(dtype)
    elif kind == "normal":
        std = param.init_spec[1]
        param.data = (rng.standard_normal(shape) * std).astype(dtype)
    else:
        raise ValueError(f"unknown init spec {param.init_spec!r}")


class Module:
    def __init__(self):
        object.__setattr__(self, "_params", {})
        object.__setattr__(self, "_modules", {})

    def __setattr__(self, name, value):
        if isinstance(value, Parameter):
            self._params[name] = value
        elif isinstance(value, Module):
            self._modules[name] = value
        elif isinstance(value, (list, tuple)) and value and all(isinstance(v, Module) for v in value):
            self._modules[name] = ModuleList(value)
            object.__setattr__(self, name, self._modules[name])
            return
        object.__setattr__(self, name, value)

    def named_parameters(self, prefix=""):
        for name, p in self._params.items():
            yield (prefix + name, p)
        for name, m in self._modules.items():
            yield from m.named_parameters(prefix + name + ".")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def initialize(self, seed: int, dtype=None):
        dtype = dtype or DEFAULT_DTYPE
        for path, p in self.named_parameters():
            rng = np.random.default_rng((seed, zlib.crc32(path.encode())))
            _fill(p, rng, dtype)
        return self

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def state_arrays(self, prefix=""):
        return {path: p.data for path, p in self.named_parameters(prefix)}

    def load_state_arrays(self, arrays, prefix=""):
        for path, p in self.named_parameters(prefix):
            if path not in arrays:
                raise KeyError(f"checkpoint is missing parameter {path!r}")
            src = arrays[path]
            if tuple(src.shape) != tuple(p.data.shape):
                raise ValueError(
                    f"shape mismatch for {path!r}: checkpoint {src.shape} vs model {p.data.shape}"
                )
            p.data = np.ascontiguousarray(src)

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


class ModuleList(Module):
    def __init__(self, modules=()):
        super().__init__()
        self._items = []
        for m in modules:
            self.append(m)

    def append(self, module: Module):
        self._modules[str(len(self._items))] = module
        self._items.append(module)

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __getitem__(self, i):
        return self._items[i]


class Conv2d(Module):
    def __init__(self, in_channels, out_channels, kernel_size, stride=1,
                 padding=None, dilation=1, bias=True):
        super().__init__()
        k = kernel_size
        if padding is None:
            padding = (k - 1) * dilation // 2
        self.stride = stride
        self.padding = padding
        self.dilation = dilation
        fan = in_channels * k * k
        self.weight = Parameter((out_channels, in_channels, k, k), ("he_fanin", fan))
        self.bias = Parameter((out_channels,), ("zeros",)) if bias else None

    def forward(self, x):
        return F.conv2d(x, self.weight, self.bias, self.stride, self.padding, self.dilation)


class GroupNorm(Module):
    def __init__(self, channels, groups=4, eps=1e-5):
        super().__init__()
        if channels % groups:
            groups = 1
        self.groups = groups
        self.eps = eps
        self.gamma = Parameter((channels,), ("ones",))
        self.beta = Parameter((channels,), ("zeros",))

    def forward(self, x):
        return F.group_norm(x, self.gamma, self.beta, self.groups, self.eps)


class ReLU(Module):
    def forward(self, x):
        return F.relu(x)


class Sequential(Module):
    def __init__(self, *modules):
        super().__init__()
        self.steps = ModuleList(modules)

    def forward(self, x):
        for m in self.steps:
            x = m(x)
        return x


def conv_block(in_ch, out_ch, stride=1, groups=4):
    """conv3x3 + GroupNorm + ReLU, the standard unit everywhere."""
    return Sequential(Conv2d(in_ch, out_ch, 3, stride=stride, bias=False),
                      GroupNorm(out_ch, groups), ReLU())

"""Optimizers and learning-rate schedules.

Segmentation runs use SGD (momentum 0.9, weight decay 1e-4, poly schedule
power 0.9); change-detection runs use AdamW with betas (0.5, 0.999) and a
linear decay to zero.
"""
from __future__ import annotations

import numpy as np


class PolySchedule:
    def __init__(self, base_lr: float, max_steps: int, power: float = 0.9):
        self.base_lr = base_lr
        self.max_steps = max_steps
        self.power = power

    def lr(self, step: int) -> float:
        t = min(step, self.max_steps)
        return self.base_lr * (1.0 - t / self.max_steps) ** self.power


class LinearSchedule:
    def __init__(self, base_lr: float, max_steps: int):
        self.base_lr = base_lr
        self.max_steps = max_steps

    def lr(self, step: int) -> float:
        t = min(step, self.max_steps)
        return self.base_lr * (1.0 - t / self.max_steps)


class ConstantSchedule:
    def __init__(self, base_lr: float):
        self.base_lr = base_lr

    def lr(self, step: int) -> float:
        return self.base_lr


class SGD:
    def __init__(self, named_params, momentum=0.9, weight_decay=1e-4):
        self.params = list(named_params)
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.velocity = {path: np.zeros_like(p.data) for path, p in self.params}

    def step(self, lr: float):
        for path, p in self.params:
            if p.grad is None:
                continue
            g = p.grad + self.weight_decay * p.data
            v = self.velocity[path]
            v *= self.momentum
            v += g
            p.data = p.data - lr * v

    def state_arrays(self):
        out = {f"optim.velocity.{k}": v for k, v in self.velocity.items()}
        return out

    def load_state_arrays(self, arrays):
        for path in self.velocity:
            key = f"optim.velocity.{path}"
            if key in arrays:
                self.velocity[path] = np.ascontiguousarray(arrays[key])


class AdamW:
    def __init__(self, named_params, betas=(0.5, 0.999), eps=1e-8, weight_decay=0.0):
        self.params = list(named_params)
        self.b1, self.b2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = {path: np.zeros_like(p.data) for path, p in self.params}
        self.v = {path: np.zeros_like(p.data) for path, p in self.params}

    def step(self, lr: float):
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for path, p in self.params:
            if p.grad is None:
                continue
            g = p.grad
            m = self.m[path]
            v = self.v[path]
            m *= self.b1
            m += (1 - self.b1) * g
            v *= self.b2
            v += (1 - self.b2) * (g * g)
            if self.weight_decay:
                p.data = p.data - lr * self.weight_decay * p.data
            p.data = p.data - lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state_arrays(self):
        out = {f"optim.m.{k}": v for k, v in self.m.items()}
        out.update({f"optim.v.{k}": v for k, v in self.v.items()})
        out["optim.t"] = np.asarray([self.t], dtype=np.int64)
        return out

    def load_state_arrays(self, arrays):
        for path in self.m:
            mk, vk = f"optim.m.{path}", f"optim.v.{path}"
            if mk in arrays:
                self.m[path] = np.ascontiguousarray(arrays[mk])
            if vk in arrays:
                self.v[path] = np.ascontiguousarray(arrays[vk])
        if "optim.t" in arrays:
            self.t = int(arrays["optim.t"][0])

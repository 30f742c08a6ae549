"""Differentiable operations on Tensors.

Hot kernels (conv, bilinear resize) dispatch through tsfuse.backend; the
rest are vectorized numpy with hand-derived backward closures.
"""
from __future__ import annotations

import numpy as np

from . import backend
from .autograd import Tensor, as_tensor


# ---------------------------------------------------------------------------
# elementwise / structural
# ---------------------------------------------------------------------------

def add(a, b):
    a = as_tensor(a)
    b = as_tensor(b)
    out = a.data + b.data
    return Tensor.result(out, (a, b), lambda g: (g, g))


def sub(a, b):
    a = as_tensor(a)
    b = as_tensor(b)
    out = a.data - b.data
    return Tensor.result(out, (a, b), lambda g: (g, -g))


def mul(a, b):
    a = as_tensor(a)
    if not isinstance(b, Tensor) and np.isscalar(b):
        s = float(b)
        return Tensor.result(a.data * s, (a,), lambda g: (g * s,))
    b = as_tensor(b)
    ad, bd = a.data, b.data
    return Tensor.result(ad * bd, (a, b), lambda g: (g * bd, g * ad))


def exp(x):
    x = as_tensor(x)
    out = np.exp(x.data)
    return Tensor.result(out, (x,), lambda g: (g * out,))


def log(x):
    x = as_tensor(x)
    xd = x.data
    return Tensor.result(np.log(xd), (x,), lambda g: (g / xd,))


def relu(x):
    x = as_tensor(x)
    mask = x.data > 0
    out = np.where(mask, x.data, 0)
    return Tensor.result(out, (x,), lambda g: (g * mask,))


def sigmoid(x):
    x = as_tensor(x)
    out = 1.0 / (1.0 + np.exp(-x.data))
    return Tensor.result(out, (x,), lambda g: (g * out * (1.0 - out),))


def matmul(a, b):
    a = as_tensor(a)
    b = as_tensor(b)
    ad, bd = a.data, b.data

    def bwd(g):
        da = np.matmul(g, np.swapaxes(bd, -1, -2))
        db = np.matmul(np.swapaxes(ad, -1, -2), g)
        return da, db

    return Tensor.result(np.matmul(ad, bd), (a, b), bwd)


def reshape(x, shape):
    x = as_tensor(x)
    old = x.data.shape
    return Tensor.result(x.data.reshape(shape), (x,), lambda g: (g.reshape(old),))


def transpose(x, axes):
    x = as_tensor(x)
    inv = np.argsort(axes)
    return Tensor.result(np.transpose(x.data, axes), (x,),
                         lambda g: (np.transpose(g, inv),))


def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g):
        return tuple(np.ascontiguousarray(p) for p in np.split(g, splits, axis=axis))

    return Tensor.result(np.concatenate([t.data for t in tensors], axis=axis),
                         tensors, bwd)


def slice_nd(x, idx):
    """Basic slicing (tuple of slice objects); backward scatters into zeros."""
    x = as_tensor(x)
    shape = x.data.shape
    out = x.data[idx]

    def bwd(g):
        dx = np.zeros(shape, dtype=g.dtype)
        dx[idx] = g
        return (dx,)

    return Tensor.result(np.ascontiguousarray(out), (x,), bwd)


def tsum(x, axis=None, keepdims=False):
    x = as_tensor(x)
    shape = x.data.shape
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def bwd(g):
        if axis is None:
            return (np.broadcast_to(g, shape).astype(g.dtype, copy=True),)
        g2 = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(g2, shape).astype(g2.dtype, copy=True),)

    return Tensor.result(out, (x,), bwd)


def tmean(x, axis=None, keepdims=False):
    x = as_tensor(x)
    shape = x.data.shape
    if axis is None:
        count = x.data.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([shape[a] for a in axes]))
    return mul(tsum(x, axis=axis, keepdims=keepdims), 1.0 / count)


# ---------------------------------------------------------------------------
# spatial ops
# ---------------------------------------------------------------------------

def conv2d(x, w, b=None, stride=1, padding=0, dilation=1):
    x = as_tensor(x)
    w = as_tensor(w)
    out = backend.conv2d_forward(x.data, w.data, stride, padding, dilation)
    xd, wd = x.data, w.data
    x_shape, w_shape = xd.shape, wd.shape
    if b is None:
        def bwd(g):
            g = np.ascontiguousarray(g)
            dx = backend.conv2d_input_grad(g, wd, x_shape, stride, padding, dilation)
            dw = backend.conv2d_weight_grad(g, xd, w_shape, stride, padding, dilation)
            return dx, dw

        return Tensor.result(out, (x, w), bwd)

    b = as_tensor(b)
    out = out + b.data[None, :, None, None]

    def bwd_b(g):
        g = np.ascontiguousarray(g)
        dx = backend.conv2d_input_grad(g, wd, x_shape, stride, padding, dilation)
        dw = backend.conv2d_weight_grad(g, xd, w_shape, stride, padding, dilation)
        return dx, dw, g.sum(axis=(0, 2, 3))

    return Tensor.result(out, (x, w, b), bwd_b)


def upsample_bilinear(x, size):
    x = as_tensor(x)
    oh, ow = size
    in_h, in_w = x.data.shape[2], x.data.shape[3]
    out = backend.bilinear_resize(x.data, oh, ow)
    return Tensor.result(out, (x,),
                         lambda g: (backend.bilinear_resize_grad(np.ascontiguousarray(g), in_h, in_w),))


def _pool_bins(in_size, out_size):
    starts = (np.arange(out_size) * in_size) // out_size
    ends = -(-((np.arange(out_size) + 1) * in_size) // out_size)
    return starts, ends


def adaptive_avg_pool2d(x, size):
    x = as_tensor(x)
    n, c, h, w = x.data.shape
    oh, ow = size
    rs, re = _pool_bins(h, oh)
    cs, ce = _pool_bins(w, ow)
    out = np.empty((n, c, oh, ow), dtype=x.data.dtype)
    for i in range(oh):
        for j in range(ow):
            out[:, :, i, j] = x.data[:, :, rs[i]:re[i], cs[j]:ce[j]].mean(axis=(2, 3))

    def bwd(g):
        dx = np.zeros((n, c, h, w), dtype=g.dtype)
        for i in range(oh):
            for j in range(ow):
                area = (re[i] - rs[i]) * (ce[j] - cs[j])
                dx[:, :, rs[i]:re[i], cs[j]:ce[j]] += g[:, :, i:i + 1, j:j + 1] / area
        return (dx,)

    return Tensor.result(out, (x,), bwd)


# ---------------------------------------------------------------------------
# normalization / attention
# ---------------------------------------------------------------------------

def group_norm(x, gamma, beta, groups, eps=1e-5):
    x = as_tensor(x)
    gamma = as_tensor(gamma)
    beta = as_tensor(beta)
    n, c, h, w = x.data.shape
    if c % groups:
        raise ValueError(f"channels {c} not divisible by {groups} groups")
    m = (c // groups) * h * w
    xg = x.data.reshape(n, groups, m)
    mu = xg.mean(axis=2, keepdims=True)
    var = xg.var(axis=2, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = ((xg - mu) * inv_std).reshape(n, c, h, w)
    out = gamma.data[None, :, None, None] * xhat + beta.data[None, :, None, None]
    gd = gamma.data

    def bwd(g):
        dxhat = (g * gd[None, :, None, None]).reshape(n, groups, m)
        xh = xhat.reshape(n, groups, m)
        t1 = dxhat.mean(axis=2, keepdims=True)
        t2 = (dxhat * xh).mean(axis=2, keepdims=True)
        dx = ((dxhat - t1 - xh * t2) * inv_std).reshape(n, c, h, w)
        dgamma = (g * xhat).sum(axis=(0, 2, 3))
        dbeta = g.sum(axis=(0, 2, 3))
        return dx, dgamma, dbeta

    return Tensor.result(out, (x, gamma, beta), bwd)


def masked_softmax(x, mask, axis):
    """Softmax over `axis`; positions where mask==0 get exactly zero weight.

    `mask` is a constant (no gradient); it must leave at least one live
    position along `axis` wherever the result is consumed.
    """
    x = as_tensor(x)
    md = np.asarray(mask.data if isinstance(mask, Tensor) else mask)
    md = (md != 0)
    neg = np.where(md, x.data, -np.inf)
    m = neg.max(axis=axis, keepdims=True)
    e = np.exp(x.data - m) * md
    s = e.sum(axis=axis, keepdims=True)
    w = e / s

    def bwd(g):
        dot = (g * w).sum(axis=axis, keepdims=True)
        return (w * (g - dot),)

    return Tensor.result(w, (x,), bwd)


def softmax(x, axis):
    x = as_tensor(x)
    m = x.data.max(axis=axis, keepdims=True)
    e = np.exp(x.data - m)
    w = e / e.sum(axis=axis, keepdims=True)

    def bwd(g):
        dot = (g * w).sum(axis=axis, keepdims=True)
        return (w * (g - dot),)

    return Tensor.result(w, (x,), bwd)


# ---------------------------------------------------------------------------
# fused losses
# ---------------------------------------------------------------------------

def cross_entropy_logits(logits, targets, ignore_label=None):
    """Mean softmax cross-entropy over pixels.

    logits (B,K,H,W), integer targets (B,H,W). Pixels whose target equals
    `ignore_label` do not contribute; if every pixel is ignored the result
    is 0 with zero gradient.
    """
    logits = as_tensor(logits)
    t = np.asarray(targets)
    ld = logits.data
    b, k, h, w = ld.shape
    valid = np.ones((b, h, w), dtype=bool) if ignore_label is None else (t != ignore_label)
    n_valid = int(valid.sum())
    m = ld.max(axis=1, keepdims=True)
    e = np.exp(ld - m)
    se = e.sum(axis=1, keepdims=True)
    lse = (m + np.log(se))[:, 0]
    tc = np.where(valid, t, 0)
    picked = np.take_along_axis(ld, tc[:, None], axis=1)[:, 0]
    if n_valid == 0:
        out = np.asarray(0.0, dtype=ld.dtype)
        return Tensor.result(out, (logits,), lambda g: (np.zeros_like(ld),))
    loss = ((lse - picked) * valid).sum() / n_valid
    prob = e / se

    def bwd(g):
        # softmax minus one-hot, restricted to valid pixels
        dl = prob.copy()
        bi, hi, wi = np.nonzero(valid)
        dl[bi, tc[bi, hi, wi], hi, wi] -= 1.0
        dl *= valid[:, None]
        return (dl * (g / n_valid),)

    return Tensor.result(np.asarray(loss, dtype=ld.dtype), (logits,), bwd)


def bce_logits(logits, targets, mask=None):
    """Mean binary cross-entropy with sigmoid semantics, numerically stable.

    With `mask` (same/broadcastable shape, nonzero = keep) the mean runs
    over kept elements only."""
    logits = as_tensor(logits)
    z = logits.data
    y = np.asarray(targets, dtype=z.dtype)
    per = np.maximum(z, 0) - z * y + np.log1p(np.exp(-np.abs(z)))
    if mask is None:
        loss = per.mean()
        n = z.size

        def bwd(g):
            p = 1.0 / (1.0 + np.exp(-z))
            return ((p - y) * (g / n),)

        return Tensor.result(np.asarray(loss, dtype=z.dtype), (logits,), bwd)

    m = np.broadcast_to(np.asarray(mask) != 0, z.shape)
    n = int(m.sum())
    if n == 0:
        return Tensor.result(np.asarray(0.0, dtype=z.dtype), (logits,),
                             lambda g: (np.zeros_like(z),))
    loss = (per * m).sum() / n

    def bwd(g):
        p = 1.0 / (1.0 + np.exp(-z))
        return ((p - y) * m * (g / n),)

    return Tensor.result(np.asarray(loss, dtype=z.dtype), (logits,), bwd)

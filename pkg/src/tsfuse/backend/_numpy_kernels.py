"""Pure-numpy kernel implementations (im2col views + BLAS matmul).

Fallback path used when numba is unavailable or TSFUSE_BACKEND=numpy.
Loop/accumulation order mirrors the numba backend so both produce the same
floating-point sums wherever the underlying GEMM calls coincide.
"""
from __future__ import annotations

import numpy as np

from ._common import bilinear_coeffs, conv_out_size, pad_input


def _im2col(xp: np.ndarray, kh: int, kw: int, stride: int, dilation: int,
            oh: int, ow: int) -> np.ndarray:
    """(N, C*KH*KW, OH*OW) gather of a padded input, contiguous copy."""
    n, c = xp.shape[0], xp.shape[1]
    sn, sc, sh, sw = xp.strides
    view = np.lib.stride_tricks.as_strided(
        xp,
        shape=(n, c, kh, kw, oh, ow),
        strides=(sn, sc, sh * dilation, sw * dilation, sh * stride, sw * stride),
        writeable=False,
    )
    return np.ascontiguousarray(view.reshape(n, c * kh * kw, oh * ow))


def conv2d_forward(x, w, stride=1, padding=0, dilation=1):
    n, c, h, wdt = x.shape
    oc, _, kh, kw = w.shape
    oh = conv_out_size(h, kh, stride, padding, dilation)
    ow = conv_out_size(wdt, kw, stride, padding, dilation)
    w2 = np.ascontiguousarray(w.reshape(oc, -1))
    if kh == 1 and kw == 1 and stride == 1 and padding == 0:
        out = np.matmul(w2[None], x.reshape(n, c, h * wdt))
        return out.reshape(n, oc, h, wdt)
    xp = pad_input(x, padding)
    out = np.empty((n, oc, oh, ow), dtype=x.dtype)
    for i in range(n):
        cols = _im2col(xp[i : i + 1], kh, kw, stride, dilation, oh, ow)[0]
        out[i] = np.dot(w2, cols).reshape(oc, oh, ow)
    return out


def conv2d_input_grad(dout, w, x_shape, stride=1, padding=0, dilation=1):
    n, c, h, wdt = x_shape
    oc, _, kh, kw = w.shape
    oh, ow = dout.shape[2], dout.shape[3]
    w2 = np.ascontiguousarray(w.reshape(oc, -1))
    if kh == 1 and kw == 1 and stride == 1 and padding == 0:
        dx = np.matmul(w2.T[None], dout.reshape(n, oc, oh * ow))
        return dx.reshape(n, c, h, wdt)
    hp, wp = h + 2 * padding, wdt + 2 * padding
    dxp = np.zeros((n, c, hp, wp), dtype=dout.dtype)
    for i in range(n):
        dcols = np.dot(w2.T, np.ascontiguousarray(dout[i].reshape(oc, oh * ow)))
        dc = dcols.reshape(c, kh, kw, oh, ow)
        for a in range(kh):
            for b in range(kw):
                dxp[i, :,
                    a * dilation : a * dilation + oh * stride : stride,
                    b * dilation : b * dilation + ow * stride : stride] += dc[:, a, b]
    if padding:
        return np.ascontiguousarray(dxp[:, :, padding:-padding, padding:-padding])
    return dxp


def conv2d_weight_grad(dout, x, w_shape, stride=1, padding=0, dilation=1):
    n, c, h, wdt = x.shape
    oc, _, kh, kw = w_shape
    oh, ow = dout.shape[2], dout.shape[3]
    if kh == 1 and kw == 1 and stride == 1 and padding == 0:
        dw2 = np.zeros((oc, c), dtype=x.dtype)
        for i in range(n):
            dw2 += np.dot(dout[i].reshape(oc, oh * ow), x[i].reshape(c, h * wdt).T)
        return dw2.reshape(w_shape)
    xp = pad_input(x, padding)
    dw2 = np.zeros((oc, c * kh * kw), dtype=x.dtype)
    for i in range(n):
        cols = _im2col(xp[i : i + 1], kh, kw, stride, dilation, oh, ow)[0]
        dw2 += np.dot(np.ascontiguousarray(dout[i].reshape(oc, oh * ow)), cols.T)
    return dw2.reshape(w_shape)


def bilinear_resize(x, out_h, out_w):
    n, c, h, w = x.shape
    if out_h == h and out_w == w:
        return x.copy()
    i0, i1, fy = bilinear_coeffs(h, out_h, x.dtype)
    j0, j1, fx = bilinear_coeffs(w, out_w, x.dtype)
    gy0 = (1 - fy)[:, None]
    gy1 = fy[:, None]
    gx0 = (1 - fx)[None, :]
    gx1 = fx[None, :]
    out = (x[:, :, i0[:, None], j0[None, :]] * (gy0 * gx0)
           + x[:, :, i0[:, None], j1[None, :]] * (gy0 * gx1)
           + x[:, :, i1[:, None], j0[None, :]] * (gy1 * gx0)
           + x[:, :, i1[:, None], j1[None, :]] * (gy1 * gx1))
    return out.astype(x.dtype, copy=False)


def bilinear_resize_grad(dout, in_h, in_w):
    n, c, oh, ow = dout.shape
    if oh == in_h and ow == in_w:
        return dout.copy()
    i0, i1, fy = bilinear_coeffs(in_h, oh, dout.dtype)
    j0, j1, fx = bilinear_coeffs(in_w, ow, dout.dtype)
    gy0 = (1 - fy)[:, None]
    gy1 = fy[:, None]
    gx0 = (1 - fx)[None, :]
    gx1 = fx[None, :]
    dx = np.zeros((n, c, in_h, in_w), dtype=dout.dtype)
    ii0 = i0[:, None]
    ii1 = i1[:, None]
    jj0 = j0[None, :]
    jj1 = j1[None, :]
    np.add.at(dx, (slice(None), slice(None), ii0, jj0), dout * (gy0 * gx0))
    np.add.at(dx, (slice(None), slice(None), ii0, jj1), dout * (gy0 * gx1))
    np.add.at(dx, (slice(None), slice(None), ii1, jj0), dout * (gy1 * gx0))
    np.add.at(dx, (slice(None), slice(None), ii1, jj1), dout * (gy1 * gx1))
    return dx

"""Numba-jitted kernels: fused im2col gather feeding BLAS np.dot.

Single-threaded by design so repeated runs are bit-identical; the gather
loops avoid the strided-view + contiguous-copy overhead of the numpy path.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from ._common import bilinear_coeffs, conv_out_size, pad_input


@njit(cache=True)
def _gather_cols(xp, cols, kh, kw, stride, dilation, oh, ow):
    c = xp.shape[0]
    k = 0
    for ic in range(c):
        xc = xp[ic]
        for a in range(kh):
            for b in range(kw):
                base = b * dilation
                p = 0
                for r in range(oh):
                    xr = xc[r * stride + a * dilation]
                    if stride == 1:
                        for j in range(ow):
                            cols[k, p + j] = xr[base + j]
                    else:
                        for j in range(ow):
                            cols[k, p + j] = xr[base + j * stride]
                    p += ow
                k += 1


@njit(cache=True)
def _conv_forward(xp, w2, kh, kw, stride, dilation, oh, ow):
    n, c = xp.shape[0], xp.shape[1]
    oc = w2.shape[0]
    cols = np.empty((c * kh * kw, oh * ow), dtype=xp.dtype)
    out = np.empty((n, oc, oh, ow), dtype=xp.dtype)
    for i in range(n):
        _gather_cols(xp[i], cols, kh, kw, stride, dilation, oh, ow)
        out[i] = np.dot(w2, cols).reshape(oc, oh, ow)
    return out


@njit(cache=True)
def _scatter_cols(dxp_i, dcols, kh, kw, stride, dilation, oh, ow):
    c = dxp_i.shape[0]
    k = 0
    for ic in range(c):
        dxc = dxp_i[ic]
        for a in range(kh):
            for b in range(kw):
                base = b * dilation
                p = 0
                for r in range(oh):
                    dxr = dxc[r * stride + a * dilation]
                    if stride == 1:
                        for j in range(ow):
                            dxr[base + j] += dcols[k, p + j]
                    else:
                        for j in range(ow):
                            dxr[base + j * stride] += dcols[k, p + j]
                    p += ow
                k += 1


@njit(cache=True)
def _conv_input_grad(dout, w2t, c, hp, wp, kh, kw, stride, dilation):
    n, oc, oh, ow = dout.shape
    dxp = np.zeros((n, c, hp, wp), dtype=dout.dtype)
    for i in range(n):
        dcols = np.dot(w2t, np.ascontiguousarray(dout[i].reshape(oc, oh * ow)))
        _scatter_cols(dxp[i], dcols, kh, kw, stride, dilation, oh, ow)
    return dxp


@njit(cache=True)
def _conv_weight_grad(dout, xp, kh, kw, stride, dilation):
    n, oc, oh, ow = dout.shape
    c = xp.shape[1]
    cols = np.empty((c * kh * kw, oh * ow), dtype=xp.dtype)
    dw2 = np.zeros((oc, c * kh * kw), dtype=xp.dtype)
    for i in range(n):
        _gather_cols(xp[i], cols, kh, kw, stride, dilation, oh, ow)
        dw2 += np.dot(np.ascontiguousarray(dout[i].reshape(oc, oh * ow)), cols.T)
    return dw2


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
    return _conv_forward(xp, w2, kh, kw, stride, dilation, oh, ow)


def conv2d_input_grad(dout, w, x_shape, stride=1, padding=0, dilation=1):
    n, c, h, wdt = x_shape
    oc, _, kh, kw = w.shape
    oh, ow = dout.shape[2], dout.shape[3]
    w2 = np.ascontiguousarray(w.reshape(oc, -1))
    if kh == 1 and kw == 1 and stride == 1 and padding == 0:
        dx = np.matmul(w2.T[None], dout.reshape(n, oc, oh * ow))
        return dx.reshape(n, c, h, wdt)
    w2t = np.ascontiguousarray(w2.T)
    dout = np.ascontiguousarray(dout)
    dxp = _conv_input_grad(dout, w2t, c, h + 2 * padding, wdt + 2 * padding,
                           kh, kw, stride, dilation)
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
    dout = np.ascontiguousarray(dout)
    dw2 = _conv_weight_grad(dout, xp, kh, kw, stride, dilation)
    return dw2.reshape(w_shape)


@njit(cache=True)
def _bilinear_fwd(x, i0, i1, fy, j0, j1, fx):
    n, c, h, w = x.shape
    oh = i0.shape[0]
    ow = j0.shape[0]
    out = np.empty((n, c, oh, ow), dtype=x.dtype)
    for ni in range(n):
        for ci in range(c):
            xc = x[ni, ci]
            for r in range(oh):
                r0 = xc[i0[r]]
                r1 = xc[i1[r]]
                wy1 = fy[r]
                wy0 = 1 - wy1
                orow = out[ni, ci, r]
                for s in range(ow):
                    wx1 = fx[s]
                    a = r0[j0[s]] * (1 - wx1) + r0[j1[s]] * wx1
                    b = r1[j0[s]] * (1 - wx1) + r1[j1[s]] * wx1
                    orow[s] = wy0 * a + wy1 * b
    return out


@njit(cache=True)
def _bilinear_bwd(dout, i0, i1, fy, j0, j1, fx, in_h, in_w):
    n, c, oh, ow = dout.shape
    dx = np.zeros((n, c, in_h, in_w), dtype=dout.dtype)
    for ni in range(n):
        for ci in range(c):
            dc = dx[ni, ci]
            for r in range(oh):
                wy1 = fy[r]
                wy0 = 1 - wy1
                drow = dout[ni, ci, r]
                for s in range(ow):
                    g = drow[s]
                    wx1 = fx[s]
                    wx0 = 1 - wx1
                    dc[i0[r], j0[s]] += g * wy0 * wx0
                    dc[i0[r], j1[s]] += g * wy0 * wx1
                    dc[i1[r], j0[s]] += g * wy1 * wx0
                    dc[i1[r], j1[s]] += g * wy1 * wx1
    return dx


def bilinear_resize(x, out_h, out_w):
    n, c, h, w = x.shape
    if out_h == h and out_w == w:
        return x.copy()
    i0, i1, fy = bilinear_coeffs(h, out_h, x.dtype)
    j0, j1, fx = bilinear_coeffs(w, out_w, x.dtype)
    return _bilinear_fwd(np.ascontiguousarray(x), i0, i1, fy, j0, j1, fx)


def bilinear_resize_grad(dout, in_h, in_w):
    n, c, oh, ow = dout.shape
    if oh == in_h and ow == in_w:
        return dout.copy()
    i0, i1, fy = bilinear_coeffs(in_h, oh, dout.dtype)
    j0, j1, fx = bilinear_coeffs(in_w, ow, dout.dtype)
    return _bilinear_bwd(np.ascontiguousarray(dout), i0, i1, fy, j0, j1, fx, in_h, in_w)

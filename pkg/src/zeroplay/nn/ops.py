"""Dense-tensor layer primitives with explicit forward and backward passes.

All spatial ops take batched (N, C, H, W) arrays.

Forward contractions (convolution taps, affine features) accumulate fixed
8-wide input chunks in index order; within a chunk numpy reduces the short
axis strictly sequentially, and elementwise arithmetic is shape-invariant
under IEEE rounding. Channels or units appended with exactly zero weights
therefore contribute exact zeros to unchanged partial sums, which is what
lets the growth operations in `growth.py` preserve outputs exactly rather
than only approximately; BLAS contractions do not guarantee it because their
reduction order depends on the array dimensions. Backward passes have no
such exactness contract and use fast matrix products.
"""

from __future__ import annotations

import numpy as np

# contraction chunk length; numpy reduces axes this short strictly sequentially
_CHUNK = 8


def conv2d_forward(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray):
    """Same-padded cross-correlation: (N,C,H,W) * (O,C,k,k) + (O,) -> (N,O,H,W).

    The kernel size must be odd so zero padding of (k-1)/2 preserves H and W.
    """
    n, c, h, w = x.shape
    out_c, in_c, kh, kw = kernel.shape
    if in_c != c:
        raise ValueError(f"kernel expects {in_c} input channels, got {c}")
    if kh != kw or kh % 2 == 0:
        raise ValueError(f"kernel must be square with odd size, got {kh}x{kw}")
    if bias.shape != (out_c,):
        raise ValueError(f"bias shape {bias.shape} does not match {out_c} output channels")
    pad = (kh - 1) // 2
    xp = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=x.dtype)
    xp[:, :, pad:pad + h, pad:pad + w] = x
    y = np.empty((n, out_c, h, w), dtype=x.dtype)
    y[:] = bias[None, :, None, None]
    for ky in range(kh):
        for kx in range(kw):
            tap = kernel[:, :, ky, kx]  # (O, C)
            window = xp[:, :, ky:ky + h, kx:kx + w]
            # fixed chunk boundaries + sequential small-axis reduction keep
            # partial sums identical when zero channels are appended
            for c0 in range(0, c, _CHUNK):
                c1 = min(c0 + _CHUNK, c)
                prod = tap[None, :, c0:c1, None, None] * window[:, None, c0:c1]
                y += prod.sum(axis=2)
    cache = (xp, x.shape, kernel, pad)
    return y, cache


def conv2d_backward(dy: np.ndarray, cache):
    xp, x_shape, kernel, pad = cache
    n, c, h, w = x_shape
    out_c, _, kh, kw = kernel.shape
    db = dy.sum(axis=(0, 2, 3))
    dkernel = np.zeros_like(kernel)
    dxp = np.zeros_like(xp)
    for ky in range(kh):
        for kx in range(kw):
            window = xp[:, :, ky:ky + h, kx:kx + w]
            dkernel[:, :, ky, kx] = np.tensordot(dy, window, axes=([0, 2, 3], [0, 2, 3]))
            spread = np.tensordot(dy, kernel[:, :, ky, kx], axes=([1], [0]))  # (N, H, W, C)
            dxp[:, :, ky:ky + h, kx:kx + w] += spread.transpose(0, 3, 1, 2)
    dx = dxp[:, :, pad:pad + h, pad:pad + w]
    return dx, dkernel, db


def relu_forward(x: np.ndarray):
    return np.maximum(x, 0), x


def relu_backward(dy: np.ndarray, cache):
    return dy * (cache > 0)


def global_pool_forward(x: np.ndarray):
    """Per-channel (max, mean) over the spatial grid: (N,C,H,W) -> (N,2C).

    Output layout is the C maxima followed by the C means, so the feature
    length depends only on the channel count, never on the board size.
    """
    n, c, h, w = x.shape
    flat = x.reshape(n, c, h * w)
    argmax = flat.argmax(axis=2)
    mx = np.take_along_axis(flat, argmax[:, :, None], axis=2)[:, :, 0]
    mean = flat.mean(axis=2)
    y = np.concatenate([mx, mean], axis=1)
    return y, (x.shape, argmax)


def global_pool_backward(dy: np.ndarray, cache):
    (n, c, h, w), argmax = cache
    dmax, dmean = dy[:, :c], dy[:, c:]
    dflat = np.repeat(dmean[:, :, None], h * w, axis=2) / (h * w)
    np.put_along_axis(dflat, argmax[:, :, None],
                      np.take_along_axis(dflat, argmax[:, :, None], axis=2) + dmax[:, :, None],
                      axis=2)
    return dflat.reshape(n, c, h, w)


def affine_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray):
    """(N, F) @ (out, F)^T + (out,) -> (N, out), accumulated in feature chunks."""
    n, f = x.shape
    if f != weight.shape[1]:
        raise ValueError(f"affine expects {weight.shape[1]} features, got {f}")
    y = np.empty((n, weight.shape[0]), dtype=x.dtype)
    y[:] = bias[None, :]
    for f0 in range(0, f, _CHUNK):
        f1 = min(f0 + _CHUNK, f)
        prod = x[:, f0:f1, None] * weight.T[None, f0:f1, :]
        y += prod.sum(axis=1)
    return y, (x, weight)


def affine_backward(dy: np.ndarray, cache):
    x, weight = cache
    dx = dy @ weight
    dweight = dy.T @ x
    dbias = dy.sum(axis=0)
    return dx, dweight, dbias


def tanh_forward(x: np.ndarray):
    y = np.tanh(x)
    return y, y


def tanh_backward(dy: np.ndarray, cache):
    return dy * (1.0 - cache * cache)

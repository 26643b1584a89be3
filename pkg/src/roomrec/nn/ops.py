"""Tensor primitives with hand-written forward and backward passes.

Batched layout is channels-last: images are (N, H, W, C), vectors (N, D).
The single-sample op signatures used in tests accept unbatched input too.
"""
from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, ShapeError


def _same_pad(f: int):
    # TensorFlow-style "same" padding for stride 1: total pad f-1, front-light.
    beg = (f - 1) // 2
    return beg, f - 1 - beg


def conv2d(x: np.ndarray, filters: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Same-padded stride-1 cross-correlation.

    x: (N, H, W, C) or (H, W, C); filters: (fh, fw, C, F); bias: (F,).
    Output spatial size equals the input's.
    """
    x, squeeze = _batched(x, 3)
    y, _ = conv2d_forward(x, filters, bias)
    return y[0] if squeeze else y


def conv2d_forward(x: np.ndarray, filters: np.ndarray, bias: np.ndarray):
    fh, fw, c_in, n_f = filters.shape
    n, h, w, c = x.shape
    if c != c_in:
        raise ShapeError(f"input has {c} channels, filters expect {c_in}")
    pt, pb = _same_pad(fh)
    pl, pr = _same_pad(fw)
    xp = np.pad(x, ((0, 0), (pt, pb), (pl, pr), (0, 0)))
    # im2col: one (N*H*W, fh*fw*C) patch matrix, conv becomes a single matmul
    cols = (
        np.lib.stride_tricks.sliding_window_view(xp, (fh, fw), axis=(1, 2))
        .transpose(0, 1, 2, 4, 5, 3)
        .reshape(n * h * w, fh * fw * c)
    )
    y = cols @ filters.reshape(fh * fw * c, n_f) + bias
    return y.reshape(n, h, w, n_f), (cols, x.shape)


def conv2d_backward(dy: np.ndarray, cache, filters: np.ndarray):
    cols, x_shape = cache
    n, h, w, c = x_shape
    fh, fw, c_in, n_f = filters.shape
    pt, _ = _same_pad(fh)
    pl, _ = _same_pad(fw)
    dy_flat = dy.reshape(n * h * w, n_f)
    d_filters = (cols.T @ dy_flat).reshape(filters.shape)
    d_bias = dy_flat.sum(axis=0)
    dcols = (dy_flat @ filters.reshape(fh * fw * c, n_f).T).reshape(n, h, w, fh, fw, c)
    dxp = np.zeros((n, h + fh - 1, w + fw - 1, c), dtype=dy.dtype)
    for i in range(fh):
        for j in range(fw):
            dxp[:, i:i + h, j:j + w, :] += dcols[:, :, :, i, j, :]
    dx = dxp[:, pt:pt + h, pl:pl + w, :]
    return dx, d_filters, d_bias


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(dy: np.ndarray, x: np.ndarray) -> np.ndarray:
    return dy * (x > 0)


def maxpool(x: np.ndarray, window=(2, 2)) -> np.ndarray:
    """Max over non-overlapping windows; stride equals the window size.

    Trailing rows/columns that do not fill a window are dropped.
    """
    x, squeeze = _batched(x, 3)
    y, _ = maxpool_forward(x, window)
    return y[0] if squeeze else y


def maxpool_forward(x: np.ndarray, window=(2, 2)):
    ph, pw = window
    n, h, w, c = x.shape
    h2, w2 = h // ph, w // pw
    if h2 == 0 or w2 == 0:
        raise ShapeError(f"pool window {window} larger than input {h}x{w}")
    tiles = (
        x[:, :h2 * ph, :w2 * pw, :]
        .reshape(n, h2, ph, w2, pw, c)
        .transpose(0, 1, 3, 5, 2, 4)
        .reshape(n, h2, w2, c, ph * pw)
    )
    idx = tiles.argmax(axis=-1)
    y = np.take_along_axis(tiles, idx[..., None], axis=-1)[..., 0]
    return y, (idx, x.shape, window)


def maxpool_backward(dy: np.ndarray, cache):
    idx, x_shape, (ph, pw) = cache
    n, h, w, c = x_shape
    h2, w2 = h // ph, w // pw
    dtiles = np.zeros((n, h2, w2, c, ph * pw), dtype=dy.dtype)
    np.put_along_axis(dtiles, idx[..., None], dy[..., None], axis=-1)
    dx = np.zeros(x_shape, dtype=dy.dtype)
    dx[:, :h2 * ph, :w2 * pw, :] = (
        dtiles.reshape(n, h2, w2, c, ph, pw)
        .transpose(0, 1, 4, 2, 5, 3)
        .reshape(n, h2 * ph, w2 * pw, c)
    )
    return dx


def flatten(x: np.ndarray) -> np.ndarray:
    """Row-major flatten of everything past the batch axis (or of the whole
    array for unbatched input)."""
    return np.ravel(x)


def dense(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Affine map w @ x + b; w is (units, in), x is (in,) or (N, in)."""
    x = np.asarray(x)
    if x.shape[-1] != w.shape[1]:
        raise ShapeError(f"input length {x.shape[-1]} != weight columns {w.shape[1]}")
    return x @ w.T + b


def dense_backward(dy: np.ndarray, x: np.ndarray, w: np.ndarray):
    dw = dy.T @ x
    db = dy.sum(axis=0)
    dx = dy @ w
    return dx, dw, db


def dropout(x: np.ndarray, rate: float = 0.4, training: bool = False,
            rng: np.random.Generator | None = None) -> np.ndarray:
    """Inverted dropout: survivors are scaled by 1/(1-rate); identity at inference."""
    y, _ = dropout_forward(x, rate, training, rng)
    return y


def dropout_forward(x, rate=0.4, training=False, rng=None):
    if not 0 <= rate < 1:
        raise ConfigurationError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0:
        return x, None
    if rng is None:
        raise ConfigurationError("training-mode dropout needs an RNG")
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask, mask


def dropout_backward(dy, mask):
    return dy if mask is None else dy * mask


def softmax_xent(logits: np.ndarray, labels):
    """Stabilized softmax cross-entropy.

    logits: (K,) with an int label, or (N, K) with (N,) labels.
    Returns (mean loss, probs).
    """
    logits = np.asarray(logits, dtype=np.float64)
    single = logits.ndim == 1
    lm = np.atleast_2d(logits)
    ys = np.atleast_1d(np.asarray(labels, dtype=int))
    n, k = lm.shape
    if k < 2:
        raise ConfigurationError("need at least 2 classes")
    if np.any(ys < 0) or np.any(ys >= k):
        raise ConfigurationError("label out of range")
    shifted = lm - lm.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    loss = float(np.mean(-(shifted[np.arange(n), ys] - np.log(exp.sum(axis=1)))))
    return loss, (probs[0] if single else probs)


def softmax_xent_backward(probs: np.ndarray, labels) -> np.ndarray:
    """Gradient of mean cross-entropy wrt logits: (probs - onehot) / N."""
    probs = np.atleast_2d(probs)
    ys = np.atleast_1d(np.asarray(labels, dtype=int))
    g = probs.copy()
    g[np.arange(len(ys)), ys] -= 1.0
    return g / len(ys)


def _batched(x: np.ndarray, rank: int):
    x = np.asarray(x)
    if x.ndim == rank:
        return x[None], True
    if x.ndim == rank + 1:
        return x, False
    raise ShapeError(f"expected rank {rank} or {rank + 1}, got shape {x.shape}")

"""Forward/backward primitives for the from-scratch trainer.

Tensors are (batch, channels, height, width) float64 arrays.  Convolutions
are valid (no padding), stride 1; pooling floor-divides, max over each
window, gradient routed to the first argmax index.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import LabelOutOfRange, ShapeMismatch


def conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """Cross-correlation: out[b,o,y,x] = bias[o] + sum over c,i,j of
    x[b,c,y+i,x+j] * w[o,c,i,j].  Output spatial dims shrink by kernel-1."""
    if x.ndim != 4 or w.ndim != 4 or x.shape[1] != w.shape[1]:
        raise ShapeMismatch(f"conv: x {x.shape} vs w {w.shape}")
    k = w.shape[2]
    if k != w.shape[3] or k > x.shape[2] or k > x.shape[3]:
        raise ShapeMismatch(f"conv: kernel {w.shape[2:]} does not fit input {x.shape[2:]}")
    windows = sliding_window_view(x, (k, k), axis=(2, 3))  # (B,C,H',W',k,k)
    y = np.einsum("bchwij,ocij->bohw", windows, w, optimize=True) + b[None, :, None, None]
    return y, (x, w)


def conv_backward(dy: np.ndarray, cache):
    x, w = cache
    k = w.shape[2]
    windows = sliding_window_view(x, (k, k), axis=(2, 3))
    dw = np.einsum("bohw,bchwij->ocij", dy, windows, optimize=True)
    db = dy.sum(axis=(0, 2, 3))
    pad = k - 1
    dy_pad = np.pad(dy, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    dy_windows = sliding_window_view(dy_pad, (k, k), axis=(2, 3))
    w_flip = w[:, :, ::-1, ::-1]
    dx = np.einsum("bohwij,ocij->bchw", dy_windows, w_flip, optimize=True)
    return dx, dw, db


def pool_forward(x: np.ndarray, window: int, stride: int):
    """Max pool; trailing partial windows are dropped (floor division)."""
    if x.ndim != 4 or window > x.shape[2] or window > x.shape[3]:
        raise ShapeMismatch(f"pool: window {window} does not fit input {x.shape}")
    bsz, ch, h, w = x.shape
    views = sliding_window_view(x, (window, window), axis=(2, 3))[:, :, ::stride, ::stride]
    ho, wo = views.shape[2], views.shape[3]
    flat = views.reshape(bsz, ch, ho, wo, window * window)
    idx = flat.argmax(axis=-1)  # first max wins ties
    y = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
    return y, (x.shape, idx, window, stride)


def pool_backward(dy: np.ndarray, cache):
    x_shape, idx, window, stride = cache
    bsz, ch, h, w = x_shape
    ho, wo = idx.shape[2], idx.shape[3]
    dx = np.zeros(x_shape, dtype=dy.dtype)
    oy, ox = np.meshgrid(np.arange(ho), np.arange(wo), indexing="ij")
    src_y = oy[None, None] * stride + idx // window
    src_x = ox[None, None] * stride + idx % window
    bidx = np.arange(bsz)[:, None, None, None]
    cidx = np.arange(ch)[None, :, None, None]
    np.add.at(dx, (bidx, cidx, src_y, src_x), dy)
    return dx


def relu_forward(x: np.ndarray):
    return np.maximum(x, 0.0), (x > 0)


def relu_backward(dy: np.ndarray, cache):
    return dy * cache


def gap_forward(x: np.ndarray):
    """Global average pool: per-channel spatial mean -> (batch, channels)."""
    return x.mean(axis=(2, 3)), x.shape


def gap_backward(dy: np.ndarray, cache):
    _, _, h, w = cache
    return np.broadcast_to(dy[:, :, None, None], cache).copy() / (h * w)


def softmax_xent(logits: np.ndarray, labels: np.ndarray):
    """Stabilized softmax cross-entropy, mean over the batch.

    Returns (loss, gradient wrt logits); gradient rows sum to ~0.
    """
    if logits.ndim != 2:
        raise ShapeMismatch(f"logits must be (batch, classes), got {logits.shape}")
    labels = np.asarray(labels)
    n, c = logits.shape
    if labels.shape != (n,):
        raise ShapeMismatch(f"labels {labels.shape} vs batch {n}")
    if labels.size and (labels.min() < 0 or labels.max() >= c):
        raise LabelOutOfRange(f"labels must be in 0..{c - 1}")
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=1, keepdims=True)
    loss = float(-np.log(probs[np.arange(n), labels]).mean())
    grad = probs.copy()
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


def sgd_momentum_step(params: list[np.ndarray], grads: list[np.ndarray],
                      velocities: list[np.ndarray], lr: float, mu: float) -> None:
    """Heavy-ball update in place: v <- mu v - lr g; w <- w + v."""
    for p, g, v in zip(params, grads, velocities):
        if p.shape != g.shape or p.shape != v.shape:
            raise ShapeMismatch(f"param {p.shape} vs grad {g.shape} vs velocity {v.shape}")
        v *= mu
        v -= lr * g
        p += v

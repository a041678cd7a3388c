"""Reverse-mode automatic differentiation over numpy arrays.

Deliberately minimal: only the operations needed by the dense and
convolutional score networks are provided (affine maps, swish, periodic
2-D convolution with optional stride-2 downsampling, nearest-neighbour
upsampling, elementwise arithmetic and reductions).
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class Tensor:
    """Node in the computation graph."""

    __slots__ = ("value", "grad", "parents", "bw")

    def __init__(
        self,
        value: np.ndarray | float,
        parents: Sequence["Tensor"] = (),
        bw: Callable[[np.ndarray], tuple] | None = None,
    ):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.parents = tuple(parents)
        self.bw = bw

    @property
    def shape(self):
        return self.value.shape


def _topo_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            stack.append((p, False))
    return order


def backward(root: Tensor, seed: np.ndarray | None = None) -> None:
    """Accumulate gradients of `root` into every reachable node's .grad."""
    order = _topo_order(root)
    for node in order:
        node.grad = None
    root.grad = np.ones_like(root.value) if seed is None else np.asarray(seed, dtype=np.float64)
    for node in reversed(order):
        if node.bw is None or node.grad is None:
            continue
        grads = node.bw(node.grad)
        for parent, g in zip(node.parents, grads):
            if g is None:
                continue
            parent.grad = g if parent.grad is None else parent.grad + g


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def add(a: Tensor, b: Tensor) -> Tensor:
    return Tensor(
        a.value + b.value,
        (a, b),
        lambda g: (_unbroadcast(g, a.value.shape), _unbroadcast(g, b.value.shape)),
    )


def sub(a: Tensor, b: Tensor) -> Tensor:
    return Tensor(
        a.value - b.value,
        (a, b),
        lambda g: (_unbroadcast(g, a.value.shape), _unbroadcast(-g, b.value.shape)),
    )


def mul(a: Tensor, b: Tensor) -> Tensor:
    return Tensor(
        a.value * b.value,
        (a, b),
        lambda g: (
            _unbroadcast(g * b.value, a.value.shape),
            _unbroadcast(g * a.value, b.value.shape),
        ),
    )


def scale(a: Tensor, c: float) -> Tensor:
    return Tensor(a.value * c, (a,), lambda g: (g * c,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """2-D matrix product (B, n) @ (n, m)."""
    return Tensor(
        a.value @ b.value,
        (a, b),
        lambda g: (g @ b.value.T, a.value.T @ g),
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def swish(a: Tensor) -> Tensor:
    sig = _sigmoid(a.value)

    def bw(g):
        return (g * sig * (1.0 + a.value * (1.0 - sig)),)

    return Tensor(a.value * sig, (a,), bw)


def swish_np(x: np.ndarray) -> np.ndarray:
    return x * _sigmoid(x)


def square(a: Tensor) -> Tensor:
    return Tensor(a.value**2, (a,), lambda g: (2.0 * g * a.value,))


def mean_all(a: Tensor) -> Tensor:
    n = a.value.size

    def bw(g):
        return (np.full_like(a.value, float(g) / n),)

    return Tensor(a.value.mean(), (a,), bw)


def sum_all(a: Tensor) -> Tensor:
    return Tensor(a.value.sum(), (a,), lambda g: (np.full_like(a.value, float(g)),))


def take_slice(a: Tensor, start: int, stop: int, shape: tuple[int, ...]) -> Tensor:
    """View a segment of a flat parameter vector as `shape`."""

    def bw(g):
        out = np.zeros_like(a.value)
        out[start:stop] = g.reshape(stop - start)
        return (out,)

    return Tensor(a.value[start:stop].reshape(shape), (a,), bw)


# --- periodic 2-D convolution -------------------------------------------------

def _im2col_periodic(x: np.ndarray, k: int, stride: int) -> np.ndarray:
    """(B, C, H, W) -> (B, Ho*Wo, C*k*k) with wrap-around padding."""
    p = k // 2
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)), mode="wrap")
    win = sliding_window_view(xp, (k, k), axis=(2, 3))  # (B, C, H, W, k, k)
    win = win[:, :, ::stride, ::stride]
    b, c, ho, wo = win.shape[:4]
    return np.ascontiguousarray(win.transpose(0, 2, 3, 1, 4, 5)).reshape(b, ho * wo, c * k * k)


def conv2d_periodic_np(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int = 1) -> np.ndarray:
    """Periodic-padded convolution. x: (B,C,H,W), w: (O,C,k,k), b: (O,)."""
    k = w.shape[-1]
    cols = _im2col_periodic(x, k, stride)
    out = cols @ w.reshape(w.shape[0], -1).T  # (B, Ho*Wo, O)
    out += b
    bsz = x.shape[0]
    ho, wo = x.shape[2] // stride, x.shape[3] // stride
    return out.transpose(0, 2, 1).reshape(bsz, w.shape[0], ho, wo)


def _rot180_swap(w: np.ndarray) -> np.ndarray:
    # (O, C, k, k) -> (C, O, k, k) with spatially flipped taps
    return np.ascontiguousarray(w[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))


def _zero_stuff(g: np.ndarray, stride: int) -> np.ndarray:
    if stride == 1:
        return g
    b, o, h, w = g.shape
    out = np.zeros((b, o, h * stride, w * stride), dtype=g.dtype)
    out[:, :, ::stride, ::stride] = g
    return out


def conv2d_periodic(x: Tensor, w: Tensor, b: Tensor, stride: int = 1) -> Tensor:
    k = w.value.shape[-1]
    cols = _im2col_periodic(x.value, k, stride)
    out_val = cols @ w.value.reshape(w.value.shape[0], -1).T
    out_val += b.value
    bsz = x.value.shape[0]
    ho, wo = x.value.shape[2] // stride, x.value.shape[3] // stride
    out_val = out_val.transpose(0, 2, 1).reshape(bsz, w.value.shape[0], ho, wo)

    def bw(g):
        g_cols = g.reshape(bsz, g.shape[1], -1).transpose(0, 2, 1)  # (B, HoWo, O)
        dw = np.einsum("bno,bnk->ok", g_cols, cols).reshape(w.value.shape)
        db = g.sum(axis=(0, 2, 3))
        # Adjoint of the periodic conv: zero-stuff the upstream gradient back to
        # the input resolution, then convolve with the flipped/transposed kernel.
        dz = _zero_stuff(g, stride)
        dx = conv2d_periodic_np(dz, _rot180_swap(w.value), np.zeros(x.value.shape[1]), stride=1)
        return (dx, dw, db)

    return Tensor(out_val, (x, w, b), bw)


def upsample2(a: Tensor) -> Tensor:
    out = a.value.repeat(2, axis=2).repeat(2, axis=3)

    def bw(g):
        bsz, c, h2, w2 = g.shape
        return (g.reshape(bsz, c, h2 // 2, 2, w2 // 2, 2).sum(axis=(3, 5)),)

    return Tensor(out, (a,), bw)


def upsample2_np(x: np.ndarray) -> np.ndarray:
    return x.repeat(2, axis=2).repeat(2, axis=3)

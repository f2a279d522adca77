"""Reverse-mode differentiation over float64 numpy arrays.

Small tape-based kernel sized for dense networks with a few thousand
parameters.  Every op records a closure that accumulates gradients into its
parents; `backward` walks the tape in reverse topological order.  Summation
order is fixed (plain numpy reductions, no parallel re-association), so
results are bit-reproducible for a given seed.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class Tensor:
    """A float64 array with an optional gradient and tape linkage.

    A tensor (and the tape hanging off it) belongs to a single training
    activity at a time; concurrent runs must build independent tensors.
    """

    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(self.data)):
            raise ValueError("tensor values must be finite")
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._backward: Callable[[np.ndarray], None] | None = None
        self._parents: tuple[Tensor, ...] = ()

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad = self.grad + g

    def __repr__(self) -> str:  # pragma: no cover
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # operator sugar over the module-level ops
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _child(data: np.ndarray, parents: tuple[Tensor, ...], backward) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad or p._backward is not None for p in parents):
        out._parents = parents
        out._backward = backward
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `g` down to `shape`, undoing numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data + b.data

    def backward(g):
        a._accumulate(_unbroadcast(g, a.data.shape))
        b._accumulate(_unbroadcast(g, b.data.shape))

    return _child(data, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data - b.data

    def backward(g):
        a._accumulate(_unbroadcast(g, a.data.shape))
        b._accumulate(_unbroadcast(-g, b.data.shape))

    return _child(data, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data * b.data

    def backward(g):
        a._accumulate(_unbroadcast(g * b.data, a.data.shape))
        b._accumulate(_unbroadcast(g * a.data, b.data.shape))

    return _child(data, (a, b), backward)


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    data = a.data @ b.data

    def backward(g):
        a._accumulate(g @ b.data.T)
        b._accumulate(a.data.T @ g)

    return _child(data, (a, b), backward)


def transpose(a) -> Tensor:
    a = _as_tensor(a)
    if a.data.ndim != 2:
        raise ValueError(f"transpose expects a 2-D tensor, got shape {a.data.shape}")

    def backward(g):
        a._accumulate(g.T)

    return _child(a.data.T.copy(), (a,), backward)


def sum_(a, axis=None, keepdims: bool = False) -> Tensor:
    a = _as_tensor(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        a._accumulate(np.broadcast_to(g, a.data.shape).copy())

    return _child(data, (a,), backward)


def mean(a, axis=None) -> Tensor:
    a = _as_tensor(a)
    if axis is None:
        n = a.data.size
    else:
        n = a.data.shape[axis]
    return mul(sum_(a, axis=axis), 1.0 / n)


def relu(a) -> Tensor:
    a = _as_tensor(a)
    mask = a.data > 0.0
    data = np.where(mask, a.data, 0.0)

    def backward(g):
        a._accumulate(g * mask)

    return _child(data, (a,), backward)


def leaky_relu(a, slope: float = 0.01) -> Tensor:
    a = _as_tensor(a)
    mask = a.data > 0.0
    data = np.where(mask, a.data, slope * a.data)

    def backward(g):
        a._accumulate(g * np.where(mask, 1.0, slope))

    return _child(data, (a,), backward)


def tanh(a) -> Tensor:
    a = _as_tensor(a)
    data = np.tanh(a.data)

    def backward(g):
        a._accumulate(g * (1.0 - data * data))

    return _child(data, (a,), backward)


def sigmoid(a) -> Tensor:
    a = _as_tensor(a)
    data = 1.0 / (1.0 + np.exp(-a.data))

    def backward(g):
        a._accumulate(g * data * (1.0 - data))

    return _child(data, (a,), backward)


def log(a) -> Tensor:
    a = _as_tensor(a)
    data = np.log(a.data)

    def backward(g):
        a._accumulate(g / a.data)

    return _child(data, (a,), backward)


def clamp_min(a, floor: float) -> Tensor:
    """Elementwise max(a, floor); gradient is zero on the clamped entries."""
    a = _as_tensor(a)
    mask = a.data > floor
    data = np.where(mask, a.data, floor)

    def backward(g):
        a._accumulate(g * mask)

    return _child(data, (a,), backward)


def softmax(a) -> Tensor:
    """Row-wise softmax over the last axis (max-shifted for stability).

    Outputs are strictly positive and each row sums to 1 up to roundoff.
    """
    a = _as_tensor(a)
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    data = exp / exp.sum(axis=-1, keepdims=True)

    def backward(g):
        inner = (g * data).sum(axis=-1, keepdims=True)
        a._accumulate(data * (g - inner))

    return _child(data, (a,), backward)


def concat(parts: Sequence[Tensor], axis: int = 1) -> Tensor:
    parts = [_as_tensor(p) for p in parts]
    data = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.data.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(lo, hi)
            p._accumulate(g[tuple(sl)])

    return _child(data, tuple(parts), backward)


def gather_rows(table: Tensor, idx) -> Tensor:
    """Rows table[idx]; gradients scatter-add back into the table."""
    idx = np.asarray(idx, dtype=np.intp)
    data = table.data[idx]

    def backward(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, idx, g)
        table._accumulate(gt)

    return _child(data, (table,), backward)


def gather_cols(a: Tensor, idx) -> Tensor:
    """Per-row element pick: out[i] = a[i, idx[i]]."""
    idx = np.asarray(idx, dtype=np.intp)
    rows = np.arange(a.data.shape[0])
    data = a.data[rows, idx]

    def backward(g):
        ga = np.zeros_like(a.data)
        ga[rows, idx] = g
        a._accumulate(ga)

    return _child(data, (a,), backward)


def bag_mean(table: Tensor, bags: Sequence[np.ndarray]) -> Tensor:
    """Mean-pool embedding rows per bag of token ids -> (len(bags), dim).

    Each bag must be nonempty.
    """
    bag_ids = [np.asarray(b, dtype=np.intp) for b in bags]
    if any(b.size == 0 for b in bag_ids):
        raise ValueError("empty token bag")
    data = np.stack([table.data[b].mean(axis=0) for b in bag_ids])

    def backward(g):
        gt = np.zeros_like(table.data)
        for i, b in enumerate(bag_ids):
            np.add.at(gt, b, g[i] / b.size)
        table._accumulate(gt)

    return _child(data, (table,), backward)


def dropout(a: Tensor, p: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; call only on training passes."""
    if not 0.0 <= p < 1.0:
        raise ValueError("dropout rate must be in [0, 1)")
    if p == 0.0:
        return a
    mask = (rng.random(a.data.shape) >= p) / (1.0 - p)
    return mul(a, Tensor(mask))


def smooth_l1(a: Tensor, target) -> Tensor:
    """Elementwise smooth L1 of (a - target): 0.5 d^2 inside |d|<1, |d|-0.5 outside."""
    a = _as_tensor(a)
    d = a.data - np.asarray(target, dtype=np.float64)
    inside = np.abs(d) < 1.0
    data = np.where(inside, 0.5 * d * d, np.abs(d) - 0.5)

    def backward(g):
        a._accumulate(g * np.where(inside, d, np.sign(d)))

    return _child(data, (a,), backward)


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(param) into .grad for every leaf parameter.

    Walks the tape in reverse topological order; intermediate nodes hold
    their gradient only for the duration of the pass.  Parameter gradients
    accumulate across calls until explicitly cleared (by the optimizer).
    """
    if loss.data.size != 1:
        raise ValueError("backward expects a scalar loss")
    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))

    loss._accumulate(np.ones_like(loss.data))
    for node in reversed(topo):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
    for node in topo:
        if not node.requires_grad:
            node.grad = None

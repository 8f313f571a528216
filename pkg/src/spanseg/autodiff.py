"""Reverse-mode automatic differentiation over dense float64 arrays.

Every operation builds a tape node recording its parents and a closure
that maps the output gradient to parent gradients. backward() walks the
tape once (iteratively, so deep recurrent graphs are fine), accumulates
gradients into Parameter leaves, and frees the graph; calling it again
without a fresh forward pass is an error.

All public operations validate shapes up front and keep values finite.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

Array = np.ndarray


def _as_array(data) -> Array:
    arr = np.asarray(data, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise ValueError("non-finite values in tensor")
    return arr


class Tensor:
    """A node in the computation graph."""

    __slots__ = ("data", "requires_grad", "_parents", "_backward", "_freed")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[Array], Sequence[Array]] | None = None
        self._freed = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() needs a scalar, got shape {self.shape}")
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


class Parameter(Tensor):
    """A trainable leaf with a persistent gradient accumulator."""

    __slots__ = ("name", "weight_decay_eligible", "grad")

    def __init__(self, data, name: str, weight_decay_eligible: bool = True):
        super().__init__(data)
        self.requires_grad = True
        self.name = name
        self.weight_decay_eligible = weight_decay_eligible
        self.grad = np.zeros_like(self.data)

    def zero_grad(self) -> None:
        self.grad.fill(0.0)


def constant(data) -> Tensor:
    return Tensor(data)


def _node(data: Array, parents: tuple[Tensor, ...], backward) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    return out


def _unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def add(a: Tensor, b: Tensor) -> Tensor:
    try:
        data = a.data + b.data
    except ValueError:
        raise ValueError(f"add: shapes {a.shape} and {b.shape} do not broadcast")
    return _node(
        data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a: Tensor, b: Tensor) -> Tensor:
    try:
        data = a.data - b.data
    except ValueError:
        raise ValueError(f"sub: shapes {a.shape} and {b.shape} do not broadcast")
    return _node(
        data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Pointwise (Hadamard) product with numpy broadcasting."""
    try:
        data = a.data * b.data
    except ValueError:
        raise ValueError(f"mul: shapes {a.shape} and {b.shape} do not broadcast")
    return _node(
        data,
        (a, b),
        lambda g: (
            _unbroadcast(g * b.data, a.shape),
            _unbroadcast(g * a.data, b.shape),
        ),
    )


def scale(a: Tensor, s: float) -> Tensor:
    return _node(a.data * s, (a,), lambda g: (g * s,))


def neg(a: Tensor) -> Tensor:
    return scale(a, -1.0)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim == 0 or b.data.ndim == 0 or a.data.ndim > 2 or b.data.ndim > 2:
        raise ValueError(f"matmul: unsupported ranks {a.shape} @ {b.shape}")
    if a.data.shape[-1] != b.data.shape[0]:
        raise ValueError(f"matmul: shapes {a.shape} and {b.shape} do not conform")
    data = a.data @ b.data

    def backward(g: Array) -> tuple[Array, Array]:
        if a.data.ndim == 2 and b.data.ndim == 2:
            return g @ b.data.T, a.data.T @ g
        if a.data.ndim == 2 and b.data.ndim == 1:
            return np.outer(g, b.data), a.data.T @ g
        if a.data.ndim == 1 and b.data.ndim == 2:
            return b.data @ g, np.outer(a.data, g)
        return g * b.data, g * a.data

    return _node(data, (a, b), backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ValueError("concat needs at least one tensor")
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g: Array) -> tuple[Array, ...]:
        index = [slice(None)] * g.ndim
        grads = []
        for i in range(len(sizes)):
            index[axis] = slice(offsets[i], offsets[i + 1])
            grads.append(g[tuple(index)])
        return tuple(grads)

    return _node(data, tuple(tensors), backward)


def stack(tensors: Sequence[Tensor]) -> Tensor:
    """Stack same-shape tensors along a new leading axis."""
    if not tensors:
        raise ValueError("stack needs at least one tensor")
    data = np.stack([t.data for t in tensors])
    return _node(data, tuple(tensors), lambda g: tuple(g[i] for i in range(len(tensors))))


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    data = a.data.reshape(shape)
    return _node(data, (a,), lambda g: (g.reshape(a.shape),))


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise ValueError(f"transpose: expected a matrix, got {a.shape}")
    return _node(a.data.T.copy(), (a,), lambda g: (g.T,))


def narrow(a: Tensor, start: int, length: int) -> Tensor:
    """Contiguous slice along the leading axis."""
    if start < 0 or start + length > a.data.shape[0]:
        raise ValueError(f"narrow: [{start}, {start + length}) out of {a.shape}")
    data = a.data[start : start + length]

    def backward(g: Array) -> tuple[Array]:
        full = np.zeros_like(a.data)
        full[start : start + length] = g
        return (full,)

    return _node(data, (a,), backward)


def rows(a: Tensor, indices) -> Tensor:
    """Gather rows of a matrix; backward scatter-adds."""
    idx = np.asarray(indices, dtype=np.intp)
    if a.data.ndim != 2:
        raise ValueError(f"rows: expected a matrix, got {a.shape}")
    data = a.data[idx]

    def backward(g: Array) -> tuple[Array]:
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        return (full,)

    return _node(data, (a,), backward)


def take_pairs(a: Tensor, row_idx, col_idx) -> Tensor:
    """Gather matrix entries at (row, col) pairs into a vector."""
    ri = np.asarray(row_idx, dtype=np.intp)
    ci = np.asarray(col_idx, dtype=np.intp)
    if a.data.ndim != 2:
        raise ValueError(f"take_pairs: expected a matrix, got {a.shape}")
    data = a.data[ri, ci]

    def backward(g: Array) -> tuple[Array]:
        full = np.zeros_like(a.data)
        np.add.at(full, (ri, ci), g)
        return (full,)

    return _node(data, (a,), backward)


def sigmoid_values(x: Array) -> Array:
    # Evaluated through exp(-|x|) so large |x| cannot overflow.
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def sigmoid(a: Tensor) -> Tensor:
    data = sigmoid_values(a.data)
    return _node(data, (a,), lambda g: (g * data * (1.0 - data),))


def tanh(a: Tensor) -> Tensor:
    data = np.tanh(a.data)
    return _node(data, (a,), lambda g: (g * (1.0 - data * data),))


def relu(a: Tensor) -> Tensor:
    data = np.maximum(a.data, 0.0)
    return _node(data, (a,), lambda g: (g * (a.data > 0.0),))


def softplus(a: Tensor) -> Tensor:
    """log(1 + exp(x)), computed without overflow."""
    data = np.logaddexp(0.0, a.data)
    return _node(data, (a,), lambda g: (g * sigmoid_values(a.data),))


def logsumexp(a: Tensor, axis: int | None = None) -> Tensor:
    m = np.max(a.data, axis=axis, keepdims=True)
    shifted = np.exp(a.data - m)
    total = np.sum(shifted, axis=axis, keepdims=True)
    keep = np.log(total) + m
    data = keep if axis is None and keep.ndim == 0 else np.squeeze(keep, axis=axis) if axis is not None else keep.reshape(())

    def backward(g: Array) -> tuple[Array]:
        soft = shifted / total
        if axis is None:
            return (g * soft,)
        return (np.expand_dims(g, axis) * soft,)

    return _node(data, (a,), backward)


def tsum(a: Tensor, axis: int | None = None) -> Tensor:
    data = a.data.sum(axis=axis)

    def backward(g: Array) -> tuple[Array]:
        if axis is None:
            return (np.full_like(a.data, 1.0) * g,)
        return (np.expand_dims(g, axis) * np.ones_like(a.data),)

    return _node(data, (a,), backward)


def tmean(a: Tensor) -> Tensor:
    count = a.data.size
    return scale(tsum(a), 1.0 / count)


def _toposort(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(param) into every reachable Parameter's grad.

    The graph is freed afterwards; a second call on the same loss (or on
    any node of its graph) raises.
    """
    if loss.data.shape != ():
        raise ValueError(f"loss must be scalar, got shape {loss.shape}")
    if loss._freed:
        raise RuntimeError("backward already ran on this graph; run forward again")
    if not loss.requires_grad:
        raise RuntimeError("loss does not depend on any parameter")

    order = _toposort(loss)
    grads: dict[int, Array] = {id(loss): np.ones(())}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if isinstance(node, Parameter):
            node.grad += g
            continue
        if node._backward is None:
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg
    for node in order:
        if not isinstance(node, Parameter):
            node._parents = ()
            node._backward = None
            node._freed = True

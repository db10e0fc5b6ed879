"""A small define-by-run reverse-mode differentiation engine on float64 numpy arrays.

Each op returns a new :class:`Tensor` holding references to its parents and a
closure that maps the output adjoint to parent adjoints.  :func:`backward`
walks the tape in reverse topological order and sums adjoints over fan-out.

Binary arithmetic follows numpy broadcasting; adjoints are reduced back to
each operand's shape.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ShapeError, UsageError

__all__ = [
    "Tensor",
    "tensor",
    "constant",
    "no_grad",
    "matmul",
    "sparse_matmul",
    "add",
    "sub",
    "mul",
    "div",
    "relu",
    "sigmoid",
    "log",
    "square",
    "elementwise",
    "concat",
    "layer_norm",
    "reduce_sum",
    "reduce_mean",
    "reduce_max",
    "reduce_min",
    "take_rows",
    "reshape",
    "bce_with_logits",
    "backward",
]

_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block (evaluation passes)."""
    global _GRAD_ENABLED
    old = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = old


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, _parents: tuple = (), _backward=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return getitem(self, index)

    def sum(self):
        return reduce_sum(self)

    def mean(self):
        return reduce_mean(self)


def tensor(data, requires_grad: bool = False) -> Tensor:
    return Tensor(data, requires_grad=requires_grad)


def constant(data) -> Tensor:
    return data if isinstance(data, Tensor) else Tensor(data)


def _make(data, parents: Sequence[Tensor], backward_fn: Callable) -> Tensor:
    needs = _GRAD_ENABLED and any(p.requires_grad for p in parents)
    if not needs:
        return Tensor(data)
    return Tensor(data, requires_grad=True, _parents=tuple(parents), _backward=backward_fn)


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from None


# -- arithmetic ---------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = constant(a), constant(b)
    _check_broadcast(a, b, "add")
    return _make(a.data + b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b) -> Tensor:
    a, b = constant(a), constant(b)
    _check_broadcast(a, b, "sub")
    return _make(a.data - b.data, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b) -> Tensor:
    a, b = constant(a), constant(b)
    _check_broadcast(a, b, "mul")
    return _make(
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def div(a, b) -> Tensor:
    a, b = constant(a), constant(b)
    _check_broadcast(a, b, "div")
    out = a.data / b.data
    return _make(
        out,
        (a, b),
        lambda g: (_unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)),
    )


def matmul(a, b) -> Tensor:
    a, b = constant(a), constant(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    return _make(a.data @ b.data, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def sparse_matmul(m, x) -> Tensor:
    """``m @ x`` for a constant (dense or scipy-sparse) matrix ``m``."""
    x = constant(x)
    if m.shape[1] != x.shape[0]:
        raise ShapeError(f"sparse_matmul: cannot multiply {m.shape} by {x.shape}")
    mt = m.T.tocsr() if sp.issparse(m) else m.T
    out = np.asarray(m @ x.data)
    return _make(out, (x,), lambda g: (np.asarray(mt @ g),))


# -- pointwise ----------------------------------------------------------------


def relu(x) -> Tensor:
    x = constant(x)
    mask = x.data > 0
    return _make(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


def _stable_sigmoid(z: np.ndarray) -> np.ndarray:
    # exp of a non-positive argument never overflows
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def sigmoid(x) -> Tensor:
    x = constant(x)
    s = _stable_sigmoid(x.data)
    return _make(s, (x,), lambda g: (g * s * (1.0 - s),))


def log(x) -> Tensor:
    x = constant(x)
    return _make(np.log(x.data), (x,), lambda g: (g / x.data,))


def square(x) -> Tensor:
    x = constant(x)
    return _make(x.data * x.data, (x,), lambda g: (2.0 * g * x.data,))


_POINTWISE = {
    "add": add,
    "sub": sub,
    "mul": mul,
    "relu": relu,
    "sigmoid": sigmoid,
    "log": log,
    "square": square,
}


def elementwise(op: str, *operands) -> Tensor:
    """Dispatch by name; binary ops require equal operand shapes."""
    try:
        fn = _POINTWISE[op]
    except KeyError:
        raise UsageError(f"unknown elementwise op {op!r}") from None
    if len(operands) == 2:
        a, b = constant(operands[0]), constant(operands[1])
        if a.shape != b.shape:
            raise ShapeError(f"{op}: operand shapes {a.shape} and {b.shape} differ")
    return fn(*operands)


# -- structural ---------------------------------------------------------------


def concat(tensors: Sequence, axis: int = -1) -> Tensor:
    ts = [constant(t) for t in tensors]
    if not ts:
        raise ShapeError("concat needs at least one tensor")
    if len(ts) == 1:
        return ts[0]
    try:
        out = np.concatenate([t.data for t in ts], axis=axis)
    except ValueError as exc:
        raise ShapeError(f"concat: {exc}") from None
    ax = axis % out.ndim
    bounds = np.cumsum([t.shape[ax] for t in ts])[:-1]

    def backward_fn(g):
        return tuple(np.split(g, bounds, axis=ax))

    return _make(out, ts, backward_fn)


def getitem(x, index) -> Tensor:
    x = constant(x)
    out = x.data[index]

    basic = all(isinstance(i, (slice, int)) for i in (index if isinstance(index, tuple) else (index,)))

    def backward_fn(g):
        full = np.zeros_like(x.data)
        if basic:
            full[index] = g
        else:
            np.add.at(full, index, g)
        return (full,)

    return _make(out, (x,), backward_fn)


def take_rows(x, idx) -> Tensor:
    """Gather rows ``x[idx]``; repeated indices accumulate their adjoints."""
    x = constant(x)
    idx = np.asarray(idx, dtype=np.int64)

    def backward_fn(g):
        full = np.zeros_like(x.data)
        np.add.at(full, idx, g)
        return (full,)

    return _make(x.data[idx], (x,), backward_fn)


def reshape(x, shape) -> Tensor:
    x = constant(x)
    return _make(x.data.reshape(shape), (x,), lambda g: (g.reshape(x.shape),))


# -- reductions ---------------------------------------------------------------


def reduce_sum(x, axis=None) -> Tensor:
    x = constant(x)
    out = x.data.sum(axis=axis)

    def backward_fn(g):
        if axis is not None:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return _make(out, (x,), backward_fn)


def reduce_mean(x, axis=None) -> Tensor:
    x = constant(x)
    count = x.data.size if axis is None else x.shape[axis]
    return mul(reduce_sum(x, axis), 1.0 / count)


def _reduce_extreme(x, pick) -> Tensor:
    """Max/min over all entries; the adjoint goes to the first extreme entry."""
    x = constant(x)
    flat = int(pick(x.data.reshape(-1)))
    out = x.data.reshape(-1)[flat]

    def backward_fn(g):
        full = np.zeros(x.data.size)
        full[flat] = g
        return (full.reshape(x.shape),)

    return _make(out, (x,), backward_fn)


def reduce_max(x) -> Tensor:
    return _reduce_extreme(x, np.argmax)


def reduce_min(x) -> Tensor:
    return _reduce_extreme(x, np.argmin)


# -- fused --------------------------------------------------------------------


def layer_norm(x, gain, bias, eps: float = 1e-3) -> Tensor:
    """Row-wise standardization followed by a per-column affine map."""
    x, gain, bias = constant(x), constant(gain), constant(bias)
    d = x.shape[-1]
    if d < 2:
        raise ShapeError("layer_norm needs at least two features")
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(f"layer_norm: gain/bias must have shape ({d},)")
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = xhat * gain.data + bias.data

    def backward_fn(g):
        red = tuple(range(g.ndim - 1))
        g_gain = (g * xhat).sum(axis=red)
        g_bias = g.sum(axis=red)
        gx = g * gain.data
        g_in = inv * (gx - gx.mean(axis=-1, keepdims=True) - xhat * (gx * xhat).mean(axis=-1, keepdims=True))
        return g_in, g_gain, g_bias

    return _make(out, (x, gain, bias), backward_fn)


def bce_with_logits(logits, labels) -> Tensor:
    """Mean binary cross entropy of ``sigmoid(logits)`` against 0/1 ``labels``.

    Uses ``max(z, 0) - z*t + log1p(exp(-|z|))``, exact for large ``|z|``.
    """
    z = constant(logits)
    t = np.asarray(labels.data if isinstance(labels, Tensor) else labels, dtype=np.float64)
    if t.shape != z.shape:
        raise ShapeError(f"bce_with_logits: logits {z.shape} vs labels {t.shape}")
    per = np.maximum(z.data, 0.0) - z.data * t + np.log1p(np.exp(-np.abs(z.data)))
    count = z.data.size
    s = _stable_sigmoid(z.data)
    return _make(per.mean(), (z,), lambda g: (g * (s - t) / count,))


# -- driver -------------------------------------------------------------------


def _topological(root: Tensor) -> list[Tensor]:
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
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> dict[Tensor, np.ndarray]:
    """Accumulate d(loss)/d(leaf) for every grad-tracking leaf reachable from ``loss``.

    Leaf gradients are also stored on ``leaf.grad``.  Returns a map keyed by
    the leaf tensors themselves.
    """
    if loss.data.size != 1 or loss.ndim not in (0, 1):
        raise UsageError(f"backward needs a scalar loss, got shape {loss.shape}")
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    leaves: dict[Tensor, np.ndarray] = {}
    if not loss.requires_grad:
        return leaves
    for node in reversed(_topological(loss)):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            node.grad = g
            leaves[node] = g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg
    return leaves

"""Float64 tensors with tape-based reverse-mode differentiation.

Operations executed while a :class:`GradTape` is active, and that touch a
tensor with ``requires_grad=True``, append a node (outputs, parents, backward
rule) to the tape.  ``tape.gradient`` walks the nodes once in reverse
recording order, which is a reverse topological order of the graph.

Only the broadcasting the model needs is supported: numpy broadcasting for
elementwise ops (gradients are summed back over broadcast axes) and 2-D
matrix products.
"""

from __future__ import annotations

import threading

import numpy as np

from ..errors import DimensionError, NumericError, ParameterError

_local = threading.local()


def _tape_stack() -> list:
    stack = getattr(_local, "tapes", None)
    if stack is None:
        stack = _local.tapes = []
    return stack


def active_tape():
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    """Immutable float64 array, optionally tracked for differentiation."""

    __slots__ = ("data", "requires_grad")
    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False):
        arr = np.array(data, dtype=np.float64)
        if not np.isfinite(arr).all():
            raise NumericError("tensor contains non-finite values")
        arr.flags.writeable = False
        self.data = arr
        self.requires_grad = requires_grad

    @classmethod
    def _wrap(cls, arr: np.ndarray, op: str) -> "Tensor":
        arr = np.asarray(arr, dtype=np.float64)
        if not np.isfinite(arr).all():
            raise NumericError(f"{op} produced non-finite values")
        t = cls.__new__(cls)
        arr.flags.writeable = False
        t.data = arr
        t.requires_grad = False
        return t

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(()))

    def __float__(self) -> float:
        return self.item()

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    def __len__(self) -> int:
        return self.shape[0]

    __add__ = lambda self, other: add(self, other)
    __radd__ = lambda self, other: add(other, self)
    __sub__ = lambda self, other: sub(self, other)
    __rsub__ = lambda self, other: sub(other, self)
    __mul__ = lambda self, other: mul(self, other)
    __rmul__ = lambda self, other: mul(other, self)
    __truediv__ = lambda self, other: div(self, other)
    __rtruediv__ = lambda self, other: div(other, self)
    __matmul__ = lambda self, other: matmul(self, other)
    __neg__ = lambda self: neg(self)
    __getitem__ = lambda self, index: getitem(self, index)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return sum_(self, axis, keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        return mean(self, axis, keepdims)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


class GradTape:
    """Records differentiable operations for one reverse pass.

    Confined to the thread that entered it::

        with GradTape() as tape:
            loss = f(w)
        (dw,) = tape.gradient(loss, [w])
    """

    def __init__(self):
        self._nodes: list = []

    def __enter__(self) -> "GradTape":
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self._nodes)

    def record(self, outputs: tuple, parents: tuple, backward) -> None:
        for out in outputs:
            out.requires_grad = True
        self._nodes.append((outputs, parents, backward))

    def gradient(self, target: Tensor, sources, seed=None) -> list:
        """Adjoints of ``target`` with respect to each tensor in ``sources``.

        Sources the target does not depend on get zero arrays.
        """
        adj = {id(target): np.ones(target.shape) if seed is None else np.asarray(seed, float)}
        for outputs, parents, backward in reversed(self._nodes):
            grads = [adj.pop(id(o), None) for o in outputs]
            if all(g is None for g in grads):
                continue
            grads = [np.zeros(o.shape) if g is None else g for o, g in zip(outputs, grads)]
            parent_grads = backward(grads if len(outputs) > 1 else grads[0])
            for p, g in zip(parents, parent_grads):
                if g is None or not p.requires_grad:
                    continue
                key = id(p)
                adj[key] = adj[key] + g if key in adj else g
        out = []
        for s in sources:
            g = adj.get(id(s))
            if g is None:
                g = np.zeros(s.shape)
            if not np.isfinite(g).all():
                raise NumericError("non-finite gradient")
            out.append(g)
        return out


def _emit(data: np.ndarray, op: str, parents: tuple, backward) -> Tensor:
    out = Tensor._wrap(data, op)
    tape = active_tape()
    if tape is not None and any(p.requires_grad for p in parents):
        tape.record((out,), parents, backward)
    return out


def _emit_many(arrays, op: str, parents: tuple, backward) -> tuple:
    outs = tuple(Tensor._wrap(a, op) for a in arrays)
    tape = active_tape()
    if tape is not None and any(p.requires_grad for p in parents):
        tape.record(outs, parents, backward)
    return outs


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _check_broadcast(a: Tensor, b: Tensor, op: str) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(f"{op}: cannot broadcast shapes {a.shape} and {b.shape}") from None


# -- elementwise arithmetic ------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "add")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _emit(a.data + b.data, "add", (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "sub")

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _emit(a.data - b.data, "sub", (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "mul")

    def backward(g):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _emit(a.data * b.data, "mul", (a, b), backward)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _check_broadcast(a, b, "div")
    out = a.data / b.data

    def backward(g):
        gb = -g * out / b.data
        return _unbroadcast(g / b.data, a.shape), _unbroadcast(gb, b.shape)

    return _emit(out, "div", (a, b), backward)


def neg(a) -> Tensor:
    a = as_tensor(a)
    return _emit(-a.data, "neg", (a,), lambda g: (-g,))


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.data)
    return _emit(out, "exp", (a,), lambda g: (g * out,))


def log(a) -> Tensor:
    a = as_tensor(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(a.data)
    return _emit(out, "log", (a,), lambda g: (g / a.data,))


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)
    return _emit(out, "tanh", (a,), lambda g: (g * (1.0 - out * out),))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # exp of a non-positive argument only, so no overflow warnings
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out = _sigmoid(a.data)
    return _emit(out, "sigmoid", (a,), lambda g: (g * out * (1.0 - out),))


def softplus(a) -> Tensor:
    """log(1 + e^x), evaluated without overflow."""
    a = as_tensor(a)
    out = np.logaddexp(0.0, a.data)
    return _emit(out, "softplus", (a,), lambda g: (g * _sigmoid(a.data),))


# -- reductions and shape manipulation -------------------------------------


def sum_(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = np.sum(a.data, axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _emit(np.asarray(out, dtype=np.float64), "sum", (a,), backward)


def mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    n = a.size if axis is None else np.prod([a.shape[i] for i in np.atleast_1d(axis)])
    return sum_(a, axis, keepdims) * (1.0 / n)


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise DimensionError(f"cannot reshape {a.shape} to {tuple(shape)}") from None
    return _emit(out, "reshape", (a,), lambda g: (g.reshape(a.shape),))


def getitem(a, index) -> Tensor:
    a = as_tensor(a)
    out = np.array(a.data[index])

    def backward(g):
        full = np.zeros(a.shape)
        np.add.at(full, index, g)
        return (full,)

    return _emit(out, "getitem", (a,), backward)


def stack(tensors, axis: int = 0) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    if not tensors:
        raise DimensionError("stack of an empty sequence")
    out = np.stack([t.data for t in tensors], axis=axis)

    def backward(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return _emit(out, "stack", tensors, backward)


def unstack(a, axis: int = 0) -> tuple:
    """Split along ``axis`` into a tuple of tensors with one backward node."""
    a = as_tensor(a)
    n = a.shape[axis]
    parts = [np.take(a.data, i, axis=axis) for i in range(n)]

    def backward(grads):
        if n == 1:
            grads = [grads]
        return (np.stack(grads, axis=axis),)

    return _emit_many(parts, "unstack", (a,), backward)


def concat(tensors, axis: int = -1) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    out = np.concatenate([t.data for t in tensors], axis=axis)
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _emit(out, "concat", tensors, backward)


# -- linear algebra ----------------------------------------------------------


def matmul(a, b) -> Tensor:
    """Matrix product of 2-D tensors."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    return _emit(a.data @ b.data, "matmul", (a, b), backward)


# -- normalisers ---------------------------------------------------------------


def softmax(z, temperature: float = 1.0, axis: int = -1) -> Tensor:
    z = as_tensor(z)
    if not temperature > 0:
        raise ParameterError(f"softmax temperature must be positive, got {temperature}")
    if z.size == 0:
        raise DimensionError("softmax of an empty tensor")
    if not np.isfinite(z.data).all():
        raise NumericError("softmax input is not finite")
    s = z.data / temperature
    e = np.exp(s - s.max(axis=axis, keepdims=True))
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - inner) / temperature,)

    return _emit(out, "softmax", (z,), backward)


def log_softmax(z, axis: int = -1) -> Tensor:
    z = as_tensor(z)
    m = z.data.max(axis=axis, keepdims=True)
    shifted = z.data - m
    out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def backward(g):
        return (g - np.exp(out) * g.sum(axis=axis, keepdims=True),)

    return _emit(out, "log_softmax", (z,), backward)


def logsumexp(z, axis=None) -> Tensor:
    """log(sum(exp(z))) via max subtraction; a 0-d tensor when ``axis`` is None."""
    z = as_tensor(z)
    if z.size == 0:
        raise DimensionError("logsumexp of an empty tensor")
    m = z.data.max(axis=axis, keepdims=True)
    lse = m + np.log(np.exp(z.data - m).sum(axis=axis, keepdims=True))
    out = lse if axis is None else np.squeeze(lse, axis=axis)
    out = np.asarray(out.reshape(()) if axis is None else out, dtype=np.float64)

    def backward(g):
        g = np.asarray(g).reshape(lse.shape)
        return (g * np.exp(z.data - lse),)

    return _emit(out, "logsumexp", (z,), backward)


# -- recurrent cell ------------------------------------------------------------


def lstm_cell(gates, c_prev) -> tuple:
    """Fused LSTM update from pre-activation gates.

    ``gates`` is ``(B, 4H)`` ordered input, forget, cell, output; returns
    ``(h, c)``, each ``(B, H)``.
    """
    gates, c_prev = as_tensor(gates), as_tensor(c_prev)
    hdim = c_prev.shape[-1]
    if gates.shape[-1] != 4 * hdim or gates.shape[:-1] != c_prev.shape[:-1]:
        raise DimensionError(f"lstm_cell: gates {gates.shape} do not match state {c_prev.shape}")
    z = gates.data
    i = _sigmoid(z[..., :hdim])
    f = _sigmoid(z[..., hdim : 2 * hdim])
    gc = np.tanh(z[..., 2 * hdim : 3 * hdim])
    o = _sigmoid(z[..., 3 * hdim :])
    c = f * c_prev.data + i * gc
    tc = np.tanh(c)
    h = o * tc

    def backward(grads):
        dh, dc_out = grads
        dc = dc_out + dh * o * (1.0 - tc * tc)
        dz = np.concatenate(
            [
                dc * gc * i * (1.0 - i),
                dc * c_prev.data * f * (1.0 - f),
                dc * i * (1.0 - gc * gc),
                dh * tc * o * (1.0 - o),
            ],
            axis=-1,
        )
        return dz, dc * f

    return _emit_many((h, c), "lstm_cell", (gates, c_prev), backward)

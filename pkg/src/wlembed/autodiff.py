"""Minimal reverse-mode automatic differentiation over numpy arrays.

Each :class:`Tensor` records its parents and a closure mapping the output
gradient to parent gradients. :func:`gradient_of` runs one reverse sweep
in topological order. Everything is float64.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from . import kernels
from .errors import NonScalarOutput, DimensionMismatch


class Tensor:
    __slots__ = ("data", "requires_grad", "parents", "backward_fn", "name")

    def __init__(self, data, requires_grad: bool = False, parents: tuple = (),
                 backward_fn: Callable | None = None, name: str | None = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.parents = parents
        self.backward_fn = backward_fn
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"Tensor{tag}(shape={self.data.shape})"

    def numpy(self) -> np.ndarray:
        return self.data

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    @property
    def T(self):
        return transpose(self)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(data, name: str | None = None) -> Tensor:
    return Tensor(np.array(data, dtype=np.float64), requires_grad=True, name=name)


def _needs_grad(*ts: Tensor) -> bool:
    return any(t.requires_grad for t in ts)


def _node(data, parents, backward_fn) -> Tensor:
    if _needs_grad(*parents):
        return Tensor(data, True, parents, backward_fn)
    return Tensor(data)


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _node(a.data + b.data, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _node(a.data - b.data, (a, b),
                 lambda g: (_unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _node(a.data * b.data, (a, b),
                 lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)))


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionMismatch(f"matmul {a.shape} @ {b.shape}")
    return _node(a.data @ b.data, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def transpose(a) -> Tensor:
    a = as_tensor(a)
    return _node(a.data.T, (a,), lambda g: (g.T,))


def relu(a) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    return _node(a.data * mask, (a,), lambda g: (g * mask,))


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out = np.empty_like(a.data)
    pos = a.data >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-a.data[pos]))
    ez = np.exp(a.data[~pos])
    out[~pos] = ez / (1.0 + ez)
    return _node(out, (a,), lambda g: (g * out * (1.0 - out),))


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)
    return _node(out, (a,), lambda g: (g * (1.0 - out * out),))


def square(a) -> Tensor:
    a = as_tensor(a)
    return _node(a.data ** 2, (a,), lambda g: (2.0 * a.data * g,))


def total(a) -> Tensor:
    """Sum of all entries as a 0-d tensor."""
    a = as_tensor(a)
    return _node(np.asarray(a.data.sum()), (a,), lambda g: (np.broadcast_to(g, a.shape).copy(),))


def mean(a) -> Tensor:
    a = as_tensor(a)
    n = a.data.size
    return _node(np.asarray(a.data.mean()), (a,),
                 lambda g: (np.broadcast_to(g / n, a.shape).copy(),))


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    cuts = np.cumsum(sizes)[:-1]
    return _node(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors),
                 lambda g: tuple(np.split(g, cuts, axis=axis)))


def gather_rows(table, idx) -> Tensor:
    """``table[idx]``; the backward pass scatter-adds into the table."""
    table = as_tensor(table)
    idx = np.ascontiguousarray(idx, dtype=np.int64)

    def backward(g):
        out = np.zeros_like(table.data)
        kernels.scatter_add_rows(out, idx, np.ascontiguousarray(g))
        return (out,)

    return _node(table.data[idx], (table,), backward)


def segment_sum(x, segments, num_segments: int) -> Tensor:
    """Row sums grouped by ``segments`` (one output row per segment)."""
    x = as_tensor(x)
    seg = np.ascontiguousarray(segments, dtype=np.int64)
    out = np.zeros((num_segments,) + x.shape[1:], dtype=np.float64)
    kernels.scatter_add_rows(out, seg, np.ascontiguousarray(x.data))
    return _node(out, (x,), lambda g: (g[seg],))


class CsrMatrix:
    """Constant sparse matrix in CSR form (not differentiated)."""

    __slots__ = ("indptr", "indices", "data", "shape", "_transpose", "symmetric")

    def __init__(self, indptr, indices, data, shape, symmetric: bool = False):
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.shape = tuple(shape)
        self.symmetric = symmetric
        self._transpose = None

    @classmethod
    def from_dense(cls, dense, symmetric: bool = False) -> "CsrMatrix":
        m = sp.csr_matrix(np.asarray(dense, dtype=np.float64))
        m.sort_indices()
        return cls(m.indptr, m.indices, m.data, m.shape, symmetric)

    def to_scipy(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=self.shape)

    def toarray(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def transpose(self) -> "CsrMatrix":
        if self.symmetric:
            return self
        if self._transpose is None:
            t = self.to_scipy().T.tocsr()
            t.sort_indices()
            self._transpose = CsrMatrix(t.indptr, t.indices, t.data, t.shape)
        return self._transpose

    def dot(self, x: np.ndarray) -> np.ndarray:
        return kernels.csr_spmm(self.indptr, self.indices, self.data, np.ascontiguousarray(x))


def spmm(A: CsrMatrix, x) -> Tensor:
    """``A @ x`` with a constant sparse ``A``."""
    x = as_tensor(x)
    if A.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"spmm {A.shape} @ {x.shape}")
    return _node(A.dot(x.data), (x,), lambda g: (A.transpose().dot(g),))


def softmax_cross_entropy(logits, labels) -> Tensor:
    """Mean cross-entropy of row-wise softmax against integer class labels."""
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - logsum
    n = logits.shape[0]
    loss = -logp[np.arange(n), labels].mean()

    def backward(g):
        p = np.exp(logp)
        p[np.arange(n), labels] -= 1.0
        return (g * p / n,)

    return _node(np.asarray(loss), (logits,), backward)


def mse(pred, target) -> Tensor:
    """Mean squared error between a column/vector prediction and targets."""
    pred = as_tensor(pred)
    target = np.asarray(target, dtype=np.float64).reshape(pred.shape)
    diff = pred.data - target
    n = diff.size
    return _node(np.asarray((diff ** 2).mean()), (pred,), lambda g: (2.0 * g * diff / n,))


def _toposort(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    visited: set[int] = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in visited:
                stack.append((p, False))
    return order


def gradient_of(output: Tensor, params: Sequence[Tensor]) -> list[np.ndarray]:
    """Reverse-mode gradients of a scalar ``output`` w.r.t. ``params``.

    Parameters the output does not depend on get zero gradients. Each
    node's backward closure runs exactly once.
    """
    if output.data.size != 1:
        raise NonScalarOutput(f"output has shape {output.shape}; expected a single element")
    grads: dict[int, np.ndarray] = {}
    if output.requires_grad:
        grads[id(output)] = np.ones_like(output.data)
        for node in reversed(_toposort(output)):
            g = grads.get(id(node))
            if g is None or node.backward_fn is None:
                continue
            for parent, pg in zip(node.parents, node.backward_fn(g)):
                if not parent.requires_grad:
                    continue
                prev = grads.get(id(parent))
                grads[id(parent)] = pg if prev is None else prev + pg
    return [grads.get(id(p), np.zeros_like(p.data)).reshape(p.shape) for p in params]

"""Dense tensors with reverse-mode differentiation over an explicit tape.

Every op builds a node holding its parents and an adjoint closure; backward()
walks the graph in reverse topological order and accumulates into .grad.
Arrays are float32 by default; building a graph from float64 parameters keeps
everything in float64 (the accumulation mode used by gradient checks).

Broadcasting is deliberately restricted: ops are same-shape elementwise,
matrix products, or bias-add over rows. That keeps every adjoint auditable.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ContractError, ShapeError

_GELU_C = math.sqrt(2.0 / math.pi)
_GELU_A = 0.044715


class Tensor:
    """A value in the computation graph.

    `data` is a numpy array (row-major), `grad` is None until backward
    reaches this node. Leaf tensors created with requires_grad=True are
    parameters; their grads persist and accumulate across backward calls
    until zero_grad().
    """

    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, name=None, _parents=(), _backward=None):
        self.data = np.asarray(data)
        self.grad = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.array(g, dtype=self.data.dtype, copy=True)
        else:
            self.grad += g

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={tuple(self.shape)}, dtype={self.data.dtype}{tag})"


def parameter(data, name: str, dtype=np.float32) -> Tensor:
    """A trainable leaf tensor."""
    arr = np.ascontiguousarray(data, dtype=dtype)
    return Tensor(arr, requires_grad=True, name=name)


def constant(data, dtype=None) -> Tensor:
    arr = np.asarray(data)
    if dtype is not None:
        arr = arr.astype(dtype, copy=False)
    return Tensor(arr)


def _node(data, parents, backward):
    out = Tensor(data, _parents=tuple(parents), _backward=backward)
    return out


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product. Inner dimensions must agree; no implicit broadcasting."""
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shapes incompatible: {tuple(a.shape)} x {tuple(b.shape)}")
    out_data = a.data @ b.data

    def backward(g):
        a._accumulate(g @ b.data.T)
        b._accumulate(a.data.T @ g)

    return _node(out_data, (a, b), backward)


def transpose(x: Tensor) -> Tensor:
    def backward(g):
        x._accumulate(g.T)

    return _node(x.data.T, (x,), backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError(f"add shapes differ: {tuple(a.shape)} vs {tuple(b.shape)}")

    def backward(g):
        a._accumulate(g)
        b._accumulate(g)

    return _node(a.data + b.data, (a, b), backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product of same-shape tensors."""
    if a.shape != b.shape:
        raise ShapeError(f"mul shapes differ: {tuple(a.shape)} vs {tuple(b.shape)}")

    def backward(g):
        a._accumulate(g * b.data)
        b._accumulate(g * a.data)

    return _node(a.data * b.data, (a, b), backward)


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)

    def backward(g):
        x._accumulate(g * c)

    return _node(x.data * x.data.dtype.type(c), (x,), backward)


def bias_add(x: Tensor, b: Tensor) -> Tensor:
    """Add a vector to every row of a matrix (the one permitted broadcast)."""
    if x.data.ndim != 2 or b.data.ndim != 1 or x.shape[1] != b.shape[0]:
        raise ShapeError(f"bias_add shapes incompatible: {tuple(x.shape)} + {tuple(b.shape)}")

    def backward(g):
        x._accumulate(g)
        b._accumulate(g.sum(axis=0))

    return _node(x.data + b.data, (x, b), backward)


def sum_all(x: Tensor) -> Tensor:
    def backward(g):
        x._accumulate(np.full_like(x.data, g))

    return _node(x.data.sum(), (x,), backward)


def mean_scalars(parts: list[Tensor]) -> Tensor:
    """Mean of scalar tensors (used to average per-query losses)."""
    if not parts:
        raise ContractError("mean_scalars over an empty list")
    n = len(parts)
    total = sum(p.data for p in parts) / n

    def backward(g):
        share = g / n
        for p in parts:
            p._accumulate(share)

    return _node(np.asarray(total, dtype=parts[0].data.dtype), tuple(parts), backward)


# ---------------------------------------------------------------------------
# nonlinearities / normalization
# ---------------------------------------------------------------------------


def gelu(x: Tensor) -> Tensor:
    """tanh-approximated GELU (smooth, which keeps finite differences honest)."""
    xd = x.data
    u = _GELU_C * (xd + _GELU_A * xd**3)
    t = np.tanh(u)
    out = 0.5 * xd * (1.0 + t)

    def backward(g):
        du = _GELU_C * (1.0 + 3.0 * _GELU_A * xd**2)
        dx = 0.5 * (1.0 + t) + 0.5 * xd * (1.0 - t**2) * du
        x._accumulate(g * dx)

    return _node(out, (x,), backward)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Row-wise layer normalization with learned scale and shift."""
    if x.data.ndim != 2 or gamma.shape != (x.shape[1],) or beta.shape != (x.shape[1],):
        raise ShapeError(f"layer_norm shapes incompatible: {tuple(x.shape)}, {tuple(gamma.shape)}")
    xd = x.data
    mu = xd.mean(axis=1, keepdims=True)
    var = ((xd - mu) ** 2).mean(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (xd - mu) * inv
    out = xhat * gamma.data + beta.data

    def backward(g):
        d = xd.shape[1]
        gamma._accumulate((g * xhat).sum(axis=0))
        beta._accumulate(g.sum(axis=0))
        dxhat = g * gamma.data
        # standard layernorm input gradient, per row
        dx = inv * (
            dxhat
            - dxhat.mean(axis=1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=1, keepdims=True)
        )
        x._accumulate(dx)

    return _node(out, (x, gamma, beta), backward)


def softmax_rows(x: Tensor, causal: bool = False) -> Tensor:
    """Row-wise softmax; with causal=True entries above the diagonal get
    probability exactly 0 (position t attends only to positions <= t)."""
    s = x.data
    if causal:
        if s.shape[0] != s.shape[1]:
            raise ShapeError(f"causal softmax needs a square matrix, got {tuple(s.shape)}")
        s = np.where(np.tri(s.shape[0], dtype=bool), s, -np.inf)
    m = s.max(axis=1, keepdims=True)
    e = np.exp(s - m)
    p = e / e.sum(axis=1, keepdims=True)

    def backward(g):
        dot = (g * p).sum(axis=1, keepdims=True)
        x._accumulate(p * (g - dot))

    return _node(p, (x,), backward)


def l2_normalize_rows(x: Tensor, eps: float = 1e-12) -> Tensor:
    """Scale each row to unit Euclidean norm."""
    xd = x.data
    norms = np.sqrt((xd * xd).sum(axis=1, keepdims=True))
    norms = np.maximum(norms, eps)
    y = xd / norms

    def backward(g):
        dot = (g * y).sum(axis=1, keepdims=True)
        x._accumulate((g - y * dot) / norms)

    return _node(y, (x,), backward)


# ---------------------------------------------------------------------------
# indexing / assembly
# ---------------------------------------------------------------------------


def embedding(weight: Tensor, ids) -> Tensor:
    """Gather rows of an embedding table."""
    idx = np.asarray(ids, dtype=np.intp)
    if idx.ndim != 1:
        raise ShapeError(f"embedding ids must be 1-D, got shape {tuple(idx.shape)}")
    if idx.size and (idx.min() < 0 or idx.max() >= weight.shape[0]):
        raise IndexError(f"embedding id out of range [0, {weight.shape[0]})")

    def backward(g):
        dw = np.zeros_like(weight.data)
        np.add.at(dw, idx, g)
        weight._accumulate(dw)

    return _node(weight.data[idx], (weight,), backward)


def take_rows(x: Tensor, ids) -> Tensor:
    return embedding(x, ids)


def row(x: Tensor, i: int) -> Tensor:
    """Extract row i of a matrix as a 1-D tensor."""
    i = int(i)
    if x.data.ndim != 2:
        raise ShapeError(f"row expects a matrix, got shape {tuple(x.shape)}")
    if not 0 <= i < x.shape[0]:
        raise IndexError(f"row {i} out of range [0, {x.shape[0]})")

    def backward(g):
        dx = np.zeros_like(x.data)
        dx[i] = g
        x._accumulate(dx)

    return _node(x.data[i].copy(), (x,), backward)


def reshape(x: Tensor, shape) -> Tensor:
    out = x.data.reshape(shape)

    def backward(g):
        x._accumulate(g.reshape(x.data.shape))

    return _node(out.copy(), (x,), backward)


def slice_cols(x: Tensor, c0: int, c1: int) -> Tensor:
    def backward(g):
        dx = np.zeros_like(x.data)
        dx[:, c0:c1] = g
        x._accumulate(dx)

    return _node(np.ascontiguousarray(x.data[:, c0:c1]), (x,), backward)


def concat_cols(parts: list[Tensor]) -> Tensor:
    widths = [p.shape[1] for p in parts]
    out = np.concatenate([p.data for p in parts], axis=1)

    def backward(g):
        c = 0
        for p, w in zip(parts, widths):
            p._accumulate(g[:, c : c + w])
            c += w

    return _node(out, tuple(parts), backward)


def stack_rows(parts: list[Tensor]) -> Tensor:
    """Stack 1-row tensors (or vectors) into an (n, d) matrix."""
    rows = [p.data.reshape(-1) for p in parts]
    out = np.stack(rows, axis=0)

    def backward(g):
        for i, p in enumerate(parts):
            p._accumulate(g[i].reshape(p.shape))

    return _node(out, tuple(parts), backward)


# ---------------------------------------------------------------------------
# losses
# ---------------------------------------------------------------------------


def softmax_cross_entropy(logits: Tensor, target: int) -> Tensor:
    """-log softmax(logits)[target] for a 1-D logits vector.

    Numerically stabilized by max subtraction; exact 0 when the target
    component saturates the softmax.
    """
    v = logits.data
    if v.ndim != 1:
        raise ShapeError(f"softmax_cross_entropy expects 1-D logits, got {tuple(v.shape)}")
    if v.shape[0] < 2:
        raise ContractError("softmax_cross_entropy needs at least 2 classes")
    target = int(target)
    if not 0 <= target < v.shape[0]:
        raise IndexError(f"target {target} out of range [0, {v.shape[0]})")
    m = v.max()
    e = np.exp(v - m)
    z = e.sum()
    loss = np.log(z) - (v[target] - m)

    def backward(g):
        d = e / z
        d[target] -= 1.0
        logits._accumulate(g * d)

    return _node(np.asarray(loss, dtype=v.dtype), (logits,), backward)


def masked_cross_entropy_sum(logits: Tensor, targets, mask) -> tuple[Tensor, int]:
    """Sum of per-row -log softmax(logits_t)[targets_t] over rows with mask=1.

    Returns (sum tensor, number of counted rows); callers divide by the count
    to get a mean over however many rows they pooled.
    """
    v = logits.data
    t = np.asarray(targets, dtype=np.intp)
    m = np.asarray(mask)
    if v.ndim != 2 or t.shape != (v.shape[0],) or m.shape != (v.shape[0],):
        raise ShapeError(
            f"masked cross entropy shapes incompatible: {tuple(v.shape)}, "
            f"{tuple(t.shape)}, {tuple(m.shape)}"
        )
    if t.size and (t.min() < 0 or t.max() >= v.shape[1]):
        raise IndexError(f"target id out of range [0, {v.shape[1]})")
    sel = m != 0
    count = int(sel.sum())
    rows = np.nonzero(sel)[0]
    vm = v[rows]
    mx = vm.max(axis=1, keepdims=True) if count else np.zeros((0, 1), dtype=v.dtype)
    e = np.exp(vm - mx)
    z = e.sum(axis=1, keepdims=True)
    per_row = np.log(z[:, 0]) - (vm[np.arange(count), t[rows]] - mx[:, 0])
    total = per_row.sum() if count else np.asarray(0.0, dtype=v.dtype)

    def backward(g):
        dv = np.zeros_like(v)
        if count:
            p = e / z
            p[np.arange(count), t[rows]] -= 1.0
            dv[rows] = g * p
        logits._accumulate(dv)

    return _node(np.asarray(total, dtype=v.dtype), (logits,), backward), count


# ---------------------------------------------------------------------------
# backward pass
# ---------------------------------------------------------------------------


def backward(loss: Tensor) -> None:
    """Reverse-mode sweep from a scalar loss.

    Parameter grads accumulate across calls until zero_grad(); intermediate
    node grads live only for the duration of one sweep.
    """
    if loss.data.shape != ():
        raise ContractError(f"backward requires a scalar loss, got shape {tuple(loss.shape)}")

    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
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
            if id(p) not in seen:
                stack.append((p, False))

    loss._accumulate(np.asarray(1.0, dtype=loss.data.dtype))
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
    # drop intermediate grads but keep the tape: a second backward() over the
    # same graph adds another full contribution to every leaf
    for node in order:
        if node._backward is not None:
            node.grad = None

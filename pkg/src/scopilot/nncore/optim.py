"""Adam with decoupled weight decay, plus global-norm gradient clipping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError, NonFiniteError
from .tensor import Tensor


@dataclass
class OptState:
    """Optimizer state shared across steps.

    Moment accumulators are keyed by parameter name, created lazily on the
    first step so the state can be built before the model exists and restored
    from a checkpoint afterwards.
    """

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    step_count: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def global_norm(params: list[Tensor]) -> float:
    """Euclidean norm of all gradients concatenated. Missing grads count as 0."""
    total = 0.0
    for p in params:
        if p.grad is not None:
            g = p.grad.astype(np.float64, copy=False)
            total += float((g * g).sum())
    return float(np.sqrt(total))


def clip_global_norm(params: list[Tensor], max_norm: float) -> float:
    """Scale all grads so their joint norm is at most max_norm.

    Returns the pre-clip norm (the number training logs report).
    """
    norm = global_norm(params)
    if max_norm > 0 and norm > max_norm:
        factor = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= p.grad.dtype.type(factor)
    return norm


def adam_step(params: list[Tensor], state: OptState) -> None:
    """One bias-corrected Adam update, in place.

    Weight decay is decoupled: applied directly to the parameter, not mixed
    into the moment estimates. A non-finite gradient aborts before any
    parameter is touched, so a failed step leaves weights and state intact.
    """
    for p in params:
        if p.grad is not None and not np.all(np.isfinite(p.grad)):
            raise NonFiniteError(f"non-finite gradient in parameter {p.name!r}")

    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for p in params:
        if p.grad is None:
            continue
        key = p.name
        if key is None:
            raise ContractError("adam_step requires named parameters")
        g = p.grad
        if key not in state.m:
            state.m[key] = np.zeros_like(p.data)
            state.v[key] = np.zeros_like(p.data)
        m = state.m[key]
        v = state.v[key]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        update = state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        if state.weight_decay:
            update = update + state.lr * state.weight_decay * p.data
        p.data -= update.astype(p.data.dtype, copy=False)

"""Numeric core: tape-based reverse-mode autodiff, layer math, Adam, and the
tensor container file format."""

from .blob import read_container, write_container
from .optim import OptState, adam_step, clip_global_norm, global_norm
from .tensor import (
    Tensor,
    add,
    backward,
    bias_add,
    concat_cols,
    constant,
    embedding,
    gelu,
    l2_normalize_rows,
    layer_norm,
    masked_cross_entropy_sum,
    matmul,
    mean_scalars,
    mul,
    parameter,
    reshape,
    row,
    scale,
    slice_cols,
    softmax_cross_entropy,
    softmax_rows,
    stack_rows,
    sum_all,
    take_rows,
    transpose,
)

__all__ = [
    "Tensor",
    "OptState",
    "adam_step",
    "add",
    "backward",
    "bias_add",
    "clip_global_norm",
    "concat_cols",
    "constant",
    "embedding",
    "gelu",
    "global_norm",
    "l2_normalize_rows",
    "layer_norm",
    "masked_cross_entropy_sum",
    "matmul",
    "mean_scalars",
    "mul",
    "parameter",
    "read_container",
    "reshape",
    "row",
    "scale",
    "slice_cols",
    "softmax_cross_entropy",
    "softmax_rows",
    "stack_rows",
    "sum_all",
    "take_rows",
    "transpose",
    "write_container",
]

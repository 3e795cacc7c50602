"""Minimal dense-tensor engine: reverse-mode autodiff on float64 arrays plus Adam."""
from . import kernels
from .optim import AdamState, adam_step
from .rng import make_rng
from .tensor import (
    Tape,
    Tensor,
    add,
    as_tensor,
    backward,
    concat,
    current_tape,
    exp,
    gather,
    gaussian_kernel,
    l2_normalize,
    layer_norm,
    log,
    logsumexp,
    matmul,
    mean,
    mean_pool,
    mul,
    relu,
    reshape,
    scale,
    scatter_sum,
    set_debug,
    softmax_rows,
    sub,
    sum_,
    transpose,
)

__all__ = [
    "AdamState",
    "Tape",
    "Tensor",
    "adam_step",
    "add",
    "as_tensor",
    "backward",
    "concat",
    "current_tape",
    "exp",
    "gather",
    "gaussian_kernel",
    "kernels",
    "l2_normalize",
    "layer_norm",
    "log",
    "logsumexp",
    "make_rng",
    "matmul",
    "mean",
    "mean_pool",
    "mul",
    "relu",
    "reshape",
    "scale",
    "scatter_sum",
    "set_debug",
    "softmax_rows",
    "sub",
    "sum_",
    "transpose",
]

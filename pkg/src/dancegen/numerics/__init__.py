"""Dense float64 tensors, reverse-mode gradients and a seeded RNG."""

from .gradcheck import grad_check, numerical_gradient
from .rng import SeededRng, splitmix64
from .tensor import (
    GradTape,
    Tensor,
    active_tape,
    add,
    as_tensor,
    concat,
    div,
    exp,
    getitem,
    log,
    log_softmax,
    logsumexp,
    lstm_cell,
    matmul,
    mean,
    mul,
    neg,
    reshape,
    sigmoid,
    softmax,
    softplus,
    stack,
    sub,
    sum_,
    tanh,
    unstack,
)

__all__ = [
    "GradTape",
    "SeededRng",
    "Tensor",
    "active_tape",
    "add",
    "as_tensor",
    "concat",
    "div",
    "exp",
    "getitem",
    "grad_check",
    "log",
    "log_softmax",
    "logsumexp",
    "lstm_cell",
    "matmul",
    "mean",
    "mul",
    "neg",
    "numerical_gradient",
    "reshape",
    "sigmoid",
    "softmax",
    "softplus",
    "splitmix64",
    "stack",
    "sub",
    "sum_",
    "tanh",
    "unstack",
]

from . import autograd
from .autograd import (
    Tensor,
    add,
    backward,
    bag_mean,
    clamp_min,
    concat,
    dropout,
    gather_cols,
    gather_rows,
    leaky_relu,
    log,
    matmul,
    mean,
    mul,
    relu,
    sigmoid,
    smooth_l1,
    softmax,
    sub,
    sum_,
    tanh,
    transpose,
)
from .gradcheck import grad_check
from .losses import (
    PROB_FLOOR,
    binary_cross_entropy,
    cross_entropy_loss,
    in_batch_nll,
    smooth_l1_loss,
    va_l2_loss,
)
from .net import ACTIVATIONS, DenseNet
from .optim import OptimConfig, Optimizer, optim_step
from .serialize import (
    FORMAT_VERSION,
    arrays_from_dict,
    load_params_dict,
    params_hash,
    params_to_dict,
)

__all__ = [
    "ACTIVATIONS",
    "DenseNet",
    "FORMAT_VERSION",
    "OptimConfig",
    "Optimizer",
    "PROB_FLOOR",
    "Tensor",
    "add",
    "arrays_from_dict",
    "autograd",
    "backward",
    "bag_mean",
    "binary_cross_entropy",
    "clamp_min",
    "concat",
    "cross_entropy_loss",
    "dropout",
    "gather_cols",
    "gather_rows",
    "grad_check",
    "in_batch_nll",
    "leaky_relu",
    "load_params_dict",
    "log",
    "matmul",
    "mean",
    "mul",
    "optim_step",
    "params_hash",
    "params_to_dict",
    "relu",
    "sigmoid",
    "smooth_l1",
    "smooth_l1_loss",
    "softmax",
    "sub",
    "sum_",
    "tanh",
    "transpose",
]

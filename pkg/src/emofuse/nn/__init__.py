from .layers import (
    BatchNorm1d,
    Dropout,
    Linear,
    Module,
    ReLU,
    assert_finite,
    relu,
    sigmoid,
    silu,
    silu_grad,
    softplus,
)
from .losses import log_softmax, weighted_smoothed_ce
from .optim import Adam, AdamW, PlateauScheduler
from .gradcheck import GradCheckResult, grad_check

__all__ = [
    "Adam",
    "AdamW",
    "BatchNorm1d",
    "Dropout",
    "GradCheckResult",
    "Linear",
    "Module",
    "PlateauScheduler",
    "ReLU",
    "assert_finite",
    "grad_check",
    "log_softmax",
    "relu",
    "sigmoid",
    "silu",
    "silu_grad",
    "softplus",
    "weighted_smoothed_ce",
]

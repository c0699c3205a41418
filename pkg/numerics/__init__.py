"""
Numerics module: float64 tensors, affine layers, Adam, inverted dropout,
seeded random streams and the finite-difference gradient check.
"""

from .tensor import Tensor, as_tensor, ensure_finite, uniform_fan, linear_forward, linear_backward, LinearCache
from .optim import AdamState, adam_step
from .dropout import dropout
from .rng import Rng, DEFAULT_SEED
from .gradcheck import grad_check, relative_error

__all__ = [
    "Tensor",
    "as_tensor",
    "ensure_finite",
    "uniform_fan",
    "linear_forward",
    "linear_backward",
    "LinearCache",
    "AdamState",
    "adam_step",
    "dropout",
    "Rng",
    "DEFAULT_SEED",
    "grad_check",
    "relative_error",
]

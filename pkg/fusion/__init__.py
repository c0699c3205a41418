"""
Fusion module: the full network, its losses and gradients, training and prediction.
"""

from .config import ModelConfig, TASKS, VARIANTS
from .model import (
    ModelParams,
    ModelGrads,
    ForwardCache,
    PARAM_NAMES,
    expected_shapes,
    model_init,
    fuse,
    forward,
    loss,
    loss_grad,
    backward,
    sigmoid,
)
from .train import fit, predict, precompute_spectra

__all__ = [
    "ModelConfig",
    "TASKS",
    "VARIANTS",
    "ModelParams",
    "ModelGrads",
    "ForwardCache",
    "PARAM_NAMES",
    "expected_shapes",
    "model_init",
    "fuse",
    "forward",
    "loss",
    "loss_grad",
    "backward",
    "sigmoid",
    "fit",
    "predict",
    "precompute_spectra",
]

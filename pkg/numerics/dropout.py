"""
Inverted dropout: kept activations are scaled by 1/(1-rate) at train time so
evaluation is the exact identity.
"""

from typing import Optional, Tuple

import numpy as np

from errors import ConfigurationError


def dropout(inputs: np.ndarray, rate: float, rng, training: bool) -> Tuple[np.ndarray, np.ndarray]:
    """
    Apply inverted dropout.

    Args:
        inputs: Activations of any shape
        rate: Drop probability, 0 <= rate < 1
        rng: Rng used for the keep mask (ignored in eval mode)
        training: If False, returns the input unchanged with an all-ones mask

    Returns:
        (output, mask) with output == inputs * mask
    """
    if not 0.0 <= rate < 1.0:
        raise ConfigurationError(f"dropout rate must be in [0, 1), got {rate}", stage="dropout")
    if not training:
        return inputs, np.ones_like(inputs)
    if rng is None:
        raise ConfigurationError("training-mode dropout needs an Rng", stage="dropout")
    keep = rng.random(inputs.shape) >= rate
    mask = keep / (1.0 - rate)
    return inputs * mask, mask


def replay_mask(grad: np.ndarray, mask: Optional[np.ndarray]) -> np.ndarray:
    """Route a gradient back through a recorded dropout mask."""
    return grad if mask is None else grad * mask

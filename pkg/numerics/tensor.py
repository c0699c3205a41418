"""
Dense float64 array helpers and the affine layer used by projections and heads.

A Tensor here is simply a float64 numpy array. Leading batch axes are allowed
on every input: a (B, P) input yields a (B, M) output and the backward pass
sums parameter gradients over the batch.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from errors import ConfigurationError, DataError, NumericFailure

Tensor = np.ndarray


def as_tensor(values, stage: str = "input") -> Tensor:
    """
    Convert values to a finite float64 array.

    Raises:
        DataError: If any value is NaN or infinite
    """
    array = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(array)):
        raise DataError("non-finite values in input", stage=stage)
    return array


def ensure_finite(array: Tensor, stage: str) -> Tensor:
    """Raise NumericFailure naming `stage` if the array holds NaN/inf."""
    if not np.all(np.isfinite(array)):
        raise NumericFailure("non-finite values produced", stage=stage)
    return array


def fan_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def uniform_fan(rng, shape: Tuple[int, ...], fan_in: int, fan_out: int) -> Tensor:
    """Draw a tensor uniformly in ±sqrt(6 / (fan_in + fan_out))."""
    if fan_in < 1 or fan_out < 1:
        raise ConfigurationError(f"fan sizes must be >= 1, got ({fan_in}, {fan_out})", stage="init")
    bound = fan_bound(fan_in, fan_out)
    return rng.uniform(-bound, bound, size=shape)


@dataclass
class LinearCache:
    weights: Tensor
    inputs: Tensor


def linear_forward(weights: Tensor, bias: Tensor, inputs: Tensor) -> Tuple[Tensor, LinearCache]:
    """
    Affine map: output_i = bias_i + sum_j weights_ij * input_j.

    Args:
        weights: (M, P) matrix
        bias: (M,) vector
        inputs: (P,) vector or (B, P) batch

    Returns:
        (output, cache) where output is (M,) or (B, M)

    Raises:
        ConfigurationError: On shape mismatch
    """
    if weights.ndim != 2 or bias.shape != (weights.shape[0],) or inputs.shape[-1] != weights.shape[1]:
        raise ConfigurationError(
            f"shape mismatch: weights {weights.shape}, bias {bias.shape}, input {inputs.shape}",
            stage="linear",
        )
    output = inputs @ weights.T + bias
    return output, LinearCache(weights=weights, inputs=inputs)


def linear_backward(cache: LinearCache, grad_out: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
    """
    Gradients of the affine map.

    Returns:
        (grad_weights, grad_bias, grad_input); parameter grads are summed over
        any batch axis.
    """
    weights, inputs = cache.weights, cache.inputs
    expected = inputs.shape[:-1] + (weights.shape[0],)
    if grad_out.shape != expected:
        raise ConfigurationError(f"grad_out shape {grad_out.shape} != {expected}", stage="linear")
    if grad_out.ndim == 1:
        grad_weights = np.outer(grad_out, inputs)
        grad_bias = grad_out.copy()
    else:
        grad_weights = grad_out.reshape(-1, weights.shape[0]).T @ inputs.reshape(-1, weights.shape[1])
        grad_bias = grad_out.reshape(-1, weights.shape[0]).sum(axis=0)
    grad_input = grad_out @ weights
    return grad_weights, grad_bias, grad_input

"""
Central finite-difference gradient check.

The closure receives the parameter dict and the input and returns
(loss, analytic_grads). Parameters are perturbed in place one element at a
time and restored afterwards, so the closure must read its parameters from the
dict on every call.
"""

import logging
from typing import Any, Callable, Dict, Mapping, Tuple

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-5
DENOMINATOR_FLOOR = 1e-8  # below this, entries are compared absolutely

LossClosure = Callable[[Mapping[str, np.ndarray], Any], Tuple[float, Mapping[str, np.ndarray]]]


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    denominator = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), DENOMINATOR_FLOOR)
    return np.abs(analytic - numeric) / denominator


def numeric_gradient(closure: LossClosure, params: Mapping[str, np.ndarray], inputs: Any, name: str, h: float = DEFAULT_STEP) -> np.ndarray:
    param = params[name]
    grad = np.zeros_like(param, dtype=np.float64)
    for index in np.ndindex(param.shape):
        original = float(param[index])
        param[index] = original + h
        loss_plus, _ = closure(params, inputs)
        param[index] = original - h
        loss_minus, _ = closure(params, inputs)
        param[index] = original
        grad[index] = (loss_plus - loss_minus) / (2.0 * h)
    return grad


def grad_check(
    closure: LossClosure,
    params: Dict[str, np.ndarray],
    inputs: Any,
    tolerance: float = 1e-4,
    h: float = DEFAULT_STEP,
) -> Dict[str, float]:
    """
    Compare analytic gradients against central differences.

    Args:
        closure: Returns (loss, grads) for the given params and inputs; dropout must be off
        params: Named float64 parameter arrays (mutated temporarily, then restored)
        inputs: Passed through to the closure
        tolerance: Errors above this are logged as failures
        h: Finite-difference step

    Returns:
        Maximum relative error per parameter name
    """
    _, analytic = closure(params, inputs)
    errors: Dict[str, float] = {}
    for name in params:
        numeric = numeric_gradient(closure, params, inputs, name, h)
        rel = relative_error(np.asarray(analytic[name], dtype=np.float64), numeric)
        errors[name] = float(rel.max()) if rel.size else 0.0
        if errors[name] > tolerance:
            logger.warning(f"Gradient check failed for {name}: max rel err {errors[name]:.3e} > {tolerance:.1e}")
    return errors

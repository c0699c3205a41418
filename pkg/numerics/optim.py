"""
Adam optimizer with bias correction.
"""

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from errors import ConfigurationError, NumericFailure

DEFAULT_LR = 0.001
DEFAULT_BETA1 = 0.9
DEFAULT_BETA2 = 0.999
DEFAULT_EPS = 1e-8


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = DEFAULT_LR
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    eps: float = DEFAULT_EPS

    @classmethod
    def zeros_like(cls, param: np.ndarray, lr: float = DEFAULT_LR, **hyper) -> "AdamState":
        return cls(m=np.zeros_like(param, dtype=np.float64), v=np.zeros_like(param, dtype=np.float64), lr=lr, **hyper)


def adam_step(state: AdamState, param: np.ndarray, grad: np.ndarray) -> Tuple[np.ndarray, AdamState]:
    """
    One Adam update.

    Args:
        state: Moments and step counter for this parameter
        param: Current parameter value
        grad: Gradient of the loss w.r.t. param

    Returns:
        (new_param, new_state); inputs are not modified

    Raises:
        ConfigurationError: If shapes do not conform
        NumericFailure: If the gradient holds NaN/inf
    """
    if param.shape != grad.shape or state.m.shape != param.shape:
        raise ConfigurationError(
            f"shape mismatch: param {param.shape}, grad {grad.shape}, state {state.m.shape}", stage="adam"
        )
    if not np.all(np.isfinite(grad)):
        raise NumericFailure("non-finite gradient", stage="adam")

    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    new_param = param - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return new_param, replace(state, m=m, v=v, t=t)

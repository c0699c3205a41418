"""
Forward scan and backpropagation through time for the linear state-space branch.

Convention (observe, then transition), with x_0 = 0:

    y_t     = C x_t + D u_t
    x_{t+1} = A x_t + B u_t

The window summary is the mean of y_t over the window, or y_{W-1} with
pooling="last". All functions accept a single (W, F) window or a (B, W, F)
batch; parameter gradients are summed over the batch.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from errors import ConfigurationError, DataError
from ssm.params import SsmParams

POOLING_MODES = ("mean", "last")


@dataclass
class SsmCache:
    window: np.ndarray   # (B, W, F)
    states: np.ndarray   # (B, W + 1, N): x_0 .. x_W
    outputs: np.ndarray  # (B, W, M): y_0 .. y_{W-1}
    pooling: str
    batched: bool


@dataclass
class SsmGrads:
    rho: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    window: np.ndarray

    def as_dict(self):
        return {"rho": self.rho, "B": self.B, "C": self.C, "D": self.D}


def _as_batch(window: np.ndarray) -> Tuple[np.ndarray, bool]:
    window = np.asarray(window, dtype=np.float64)
    if window.ndim == 2:
        return window[None, :, :], False
    if window.ndim == 3:
        return window, True
    raise ConfigurationError(f"window must be (W, F) or (B, W, F), got {window.shape}", stage="ssm")


def ssm_forward(params: SsmParams, window: np.ndarray, pooling: str = "mean") -> Tuple[np.ndarray, SsmCache]:
    """
    Run the recurrence over a window and pool the outputs.

    Args:
        params: SSM parameters (read-only)
        window: (W, F) or (B, W, F) input
        pooling: "mean" (default) or "last"

    Returns:
        (h_time, cache); h_time is (M,) or (B, M)

    Raises:
        DataError: If the window holds NaN/inf
    """
    if pooling not in POOLING_MODES:
        raise ConfigurationError(f"unknown pooling '{pooling}'", stage="ssm")
    u, batched = _as_batch(window)
    if u.shape[1] < 1:
        raise ConfigurationError("window length must be >= 1", stage="ssm")
    if u.shape[2] != params.input_dim:
        raise ConfigurationError(f"window has {u.shape[2]} features, SSM expects {params.input_dim}", stage="ssm")
    if not np.all(np.isfinite(u)):
        raise DataError("non-finite values in window", stage="ssm")

    batch, length, _ = u.shape
    a = params.a
    drive = u @ params.B.T  # (B, W, N): B u_t

    states = np.zeros((batch, length + 1, params.state_dim))
    for t in range(length):
        states[:, t + 1] = a * states[:, t] + drive[:, t]

    outputs = states[:, :length] @ params.C.T + u @ params.D.T
    h_time = outputs.mean(axis=1) if pooling == "mean" else outputs[:, -1]

    cache = SsmCache(window=u, states=states, outputs=outputs, pooling=pooling, batched=batched)
    return (h_time if batched else h_time[0]), cache


def ssm_backward(params: SsmParams, cache: SsmCache, grad_h_time: np.ndarray) -> SsmGrads:
    """
    Adjoint of ssm_forward.

    The adjoint recurrence runs backward from lambda_W = 0:
    lambda_t = A^T lambda_{t+1} + C^T dL/dy_t. The rho gradient includes the
    tanh'(rho) factor.

    Args:
        params: Parameters used in the matching forward
        cache: Cache from that forward
        grad_h_time: dL/dh_time, (M,) or (B, M)

    Returns:
        SsmGrads with parameter grads and the input-window grad
    """
    u, states = cache.window, cache.states
    batch, length, _ = u.shape
    grad_h = np.asarray(grad_h_time, dtype=np.float64)
    if not cache.batched:
        grad_h = grad_h[None, :]
    if grad_h.shape != (batch, params.output_dim):
        raise ConfigurationError(f"grad_h_time shape {grad_h.shape} does not match cache", stage="ssm")

    grad_y = np.zeros((batch, length, params.output_dim))
    if cache.pooling == "mean":
        grad_y[:] = grad_h[:, None, :] / length
    else:
        grad_y[:, -1] = grad_h

    observed = states[:, :length]  # x_0 .. x_{W-1}
    grad_C = np.einsum("btm,btn->mn", grad_y, observed)
    grad_D = np.einsum("btm,btf->mf", grad_y, u)
    grad_x_direct = grad_y @ params.C  # (B, W, N)

    a = params.a
    adjoint = np.zeros((batch, length + 1, params.state_dim))
    for t in range(length - 1, -1, -1):
        adjoint[:, t] = a * adjoint[:, t + 1] + grad_x_direct[:, t]

    carried = adjoint[:, 1:]  # dL/dx_{t+1}, aligned with u_t and x_t
    grad_B = np.einsum("btn,btf->nf", carried, u)
    grad_a = np.einsum("btn,btn->n", carried, observed)
    grad_rho = grad_a * (1.0 - a * a)
    grad_window = grad_y @ params.D + carried @ params.B

    return SsmGrads(
        rho=grad_rho,
        B=grad_B,
        C=grad_C,
        D=grad_D,
        window=grad_window if cache.batched else grad_window[0],
    )

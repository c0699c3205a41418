"""
Discrete Fourier transform, X_k = sum_t x_t exp(-i 2 pi k t / W).

Power-of-two lengths take an iterative radix-2 decimation-in-time path;
other lengths use direct summation. Both operate on the last axis, so a
(..., W) batch is transformed in one call.
"""

from functools import lru_cache

import numpy as np

from errors import ConfigurationError, DataError

METHODS = ("auto", "fast", "direct")


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@lru_cache(maxsize=64)
def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    indices = np.arange(n)
    reversed_indices = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        reversed_indices = (reversed_indices << 1) | (indices & 1)
        indices = indices >> 1
    reversed_indices.setflags(write=False)
    return reversed_indices


@lru_cache(maxsize=64)
def _dft_matrix(n: int) -> np.ndarray:
    k = np.arange(n)
    matrix = np.exp(-2j * np.pi * np.outer(k, k) / n)
    matrix.setflags(write=False)
    return matrix


def dft_direct(signal: np.ndarray) -> np.ndarray:
    """O(W^2) direct summation."""
    n = signal.shape[-1]
    return signal @ _dft_matrix(n).T


def dft_radix2(signal: np.ndarray) -> np.ndarray:
    """Iterative Cooley-Tukey radix-2; W must be a power of two."""
    n = signal.shape[-1]
    if not is_power_of_two(n):
        raise ConfigurationError(f"radix-2 path needs a power-of-two length, got {n}", stage="dft")
    lead = signal.shape[:-1]
    y = signal[..., _bit_reverse_indices(n)].astype(np.complex128)
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = y.reshape(lead + (n // size, size))
        even = blocks[..., :half]
        odd = blocks[..., half:] * twiddle
        y = np.concatenate([even + odd, even - odd], axis=-1).reshape(lead + (n,))
        size *= 2
    return y


def dft(signal: np.ndarray, method: str = "auto") -> np.ndarray:
    """
    Complex DFT coefficients of a real signal along the last axis.

    Args:
        signal: (W,) or (..., W) real values
        method: "auto" picks radix-2 for power-of-two W, direct otherwise

    Returns:
        Complex array with the same shape as signal

    Raises:
        DataError: If the signal holds NaN/inf
    """
    if method not in METHODS:
        raise ConfigurationError(f"unknown DFT method '{method}'", stage="dft")
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim == 0 or signal.shape[-1] < 1:
        raise ConfigurationError("signal length must be >= 1", stage="dft")
    if not np.all(np.isfinite(signal)):
        raise DataError("non-finite values in signal", stage="dft")

    n = signal.shape[-1]
    if method == "fast" or (method == "auto" and is_power_of_two(n)):
        return dft_radix2(signal)
    return dft_direct(signal)

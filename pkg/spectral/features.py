"""
Spectral features: normalized magnitudes of the lowest K DFT bins of every
feature column, concatenated feature-major.

Bins are |X_k| / W, so a constant c gives c in bin 0 and a unit-amplitude
sinusoid at bin k (0 < k < W/2) gives 0.5. No gradient flows into this
branch; the trainable projection sits downstream.
"""

import numpy as np

from errors import ConfigurationError
from spectral.dft import dft

DEFAULT_MAX_BINS = 16
TAPERS = ("rectangular", "hann")


def max_bins(window_length: int) -> int:
    return window_length // 2 + 1


def default_bins(window_length: int) -> int:
    """min(16, W // 2 + 1)."""
    return min(DEFAULT_MAX_BINS, max_bins(window_length))


def taper_weights(window_length: int, taper: str = "rectangular") -> np.ndarray:
    if taper == "rectangular":
        return np.ones(window_length)
    if taper == "hann":
        # periodic Hann, mean 0.5
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(window_length) / window_length)
    raise ConfigurationError(f"unknown taper '{taper}'", stage="spectral")


def magnitude_bins(coeffs: np.ndarray, bins: int) -> np.ndarray:
    """
    Keep the first `bins` coefficients as normalized magnitudes.

    Args:
        coeffs: Complex DFT coefficients, (..., W)
        bins: K, at most W // 2 + 1

    Returns:
        (..., K) non-negative magnitudes |X_k| / W
    """
    length = coeffs.shape[-1]
    if not 1 <= bins <= max_bins(length):
        raise ConfigurationError(f"K must be in [1, {max_bins(length)}] for W={length}, got {bins}", stage="spectral")
    return np.abs(coeffs[..., :bins]) / length


def spectral_features(window: np.ndarray, bins: int, taper: str = "rectangular") -> np.ndarray:
    """
    Spectral vector of a window.

    Args:
        window: (W, F) or (B, W, F)
        bins: K bins kept per feature
        taper: "rectangular" (default) or "hann"

    Returns:
        (F * K,) or (B, F * K), feature-major
    """
    window = np.asarray(window, dtype=np.float64)
    if window.ndim not in (2, 3):
        raise ConfigurationError(f"window must be (W, F) or (B, W, F), got {window.shape}", stage="spectral")
    length = window.shape[-2]
    columns = np.swapaxes(window, -1, -2) * taper_weights(length, taper)  # (..., F, W)
    magnitudes = magnitude_bins(dft(columns), bins)  # (..., F, K)
    return magnitudes.reshape(magnitudes.shape[:-2] + (-1,))

"""
Frequency-domain branch: DFT and magnitude-spectrum features.
"""

from .dft import dft, dft_direct, dft_radix2, is_power_of_two
from .features import magnitude_bins, spectral_features, default_bins, max_bins, TAPERS

__all__ = [
    "dft",
    "dft_direct",
    "dft_radix2",
    "is_power_of_two",
    "magnitude_bins",
    "spectral_features",
    "default_bins",
    "max_bins",
    "TAPERS",
]

"""
Model hyperparameters.
"""

from dataclasses import dataclass, asdict
from typing import Any, Dict, Optional

from errors import ConfigurationError
from spectral import default_bins, max_bins, TAPERS
from ssm import POOLING_MODES

TASKS = ("classify", "regress")
VARIANTS = ("full", "no_time", "no_freq", "no_both")

DEFAULT_STATE_DIM = 16
DEFAULT_FUSION_DIM = 16
DEFAULT_DROPOUT = 0.3
DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class ModelConfig:
    """
    Shape and behavior of one MamNet network.

    spectral_bins = None resolves to min(16, W // 2 + 1).
    """

    window: int
    features: int
    state_dim: int = DEFAULT_STATE_DIM
    fusion_dim: int = DEFAULT_FUSION_DIM
    spectral_bins: Optional[int] = None
    task: str = "classify"
    variant: str = "full"
    dropout: float = DEFAULT_DROPOUT
    threshold: float = DEFAULT_THRESHOLD
    taper: str = "rectangular"
    pooling: str = "mean"

    def __post_init__(self):
        if self.spectral_bins is None and self.window >= 1:
            object.__setattr__(self, "spectral_bins", default_bins(self.window))
        self.validate()

    def validate(self) -> None:
        dims = {"window": self.window, "features": self.features, "state_dim": self.state_dim, "fusion_dim": self.fusion_dim}
        for name, value in dims.items():
            if int(value) != value or value < 1:
                raise ConfigurationError(f"{name} must be an integer >= 1, got {value}", stage="model_config")
        if not 1 <= self.spectral_bins <= max_bins(self.window):
            raise ConfigurationError(
                f"spectral_bins must be in [1, {max_bins(self.window)}] for window {self.window}, got {self.spectral_bins}",
                stage="model_config",
            )
        if self.task not in TASKS:
            raise ConfigurationError(f"task must be one of {TASKS}, got '{self.task}'", stage="model_config")
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"variant must be one of {VARIANTS}, got '{self.variant}'", stage="model_config")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigurationError(f"dropout must be in [0, 1), got {self.dropout}", stage="model_config")
        if self.taper not in TAPERS:
            raise ConfigurationError(f"taper must be one of {TAPERS}, got '{self.taper}'", stage="model_config")
        if self.pooling not in POOLING_MODES:
            raise ConfigurationError(f"pooling must be one of {POOLING_MODES}, got '{self.pooling}'", stage="model_config")

    @property
    def spectral_size(self) -> int:
        return self.features * self.spectral_bins

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

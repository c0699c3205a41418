"""
State-space parameters and their initialization.

The transition matrix A is diagonal and stored pre-activation: A = diag(tanh(rho)),
so |a_i| < 1 for every finite rho and the recurrence cannot blow up.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from errors import ConfigurationError
from numerics import uniform_fan

# tanh(rho) is drawn in this range at init: biased toward long memory.
DECAY_LOW = 0.5
DECAY_HIGH = 0.95


@dataclass
class SsmParams:
    rho: np.ndarray  # (N,)
    B: np.ndarray    # (N, F)
    C: np.ndarray    # (M, N)
    D: np.ndarray    # (M, F)

    @property
    def a(self) -> np.ndarray:
        """Effective diagonal of A."""
        return np.tanh(self.rho)

    @property
    def state_dim(self) -> int:
        return self.rho.shape[0]

    @property
    def input_dim(self) -> int:
        return self.B.shape[1]

    @property
    def output_dim(self) -> int:
        return self.C.shape[0]

    def named_tensors(self) -> Dict[str, np.ndarray]:
        return {"rho": self.rho, "B": self.B, "C": self.C, "D": self.D}

    def copy(self) -> "SsmParams":
        return SsmParams(rho=self.rho.copy(), B=self.B.copy(), C=self.C.copy(), D=self.D.copy())


def ssm_init(state_dim: int, input_dim: int, output_dim: int, rng) -> SsmParams:
    """
    Initialize SSM parameters.

    Args:
        state_dim: N, hidden state size
        input_dim: F, features per time step
        output_dim: M, output size
        rng: Rng stream reserved for this initialization

    Returns:
        SsmParams with tanh(rho) uniform in [0.5, 0.95] and B, C, D uniform
        in ±sqrt(6 / (fan_in + fan_out))

    Raises:
        ConfigurationError: If any dimension is < 1
    """
    if min(state_dim, input_dim, output_dim) < 1:
        raise ConfigurationError(
            f"SSM dims must be >= 1, got N={state_dim}, F={input_dim}, M={output_dim}", stage="ssm_init"
        )
    decay = rng.uniform(DECAY_LOW, DECAY_HIGH, size=state_dim)
    return SsmParams(
        rho=np.arctanh(decay),
        B=uniform_fan(rng, (state_dim, input_dim), input_dim, state_dim),
        C=uniform_fan(rng, (output_dim, state_dim), state_dim, output_dim),
        D=uniform_fan(rng, (output_dim, input_dim), input_dim, output_dim),
    )

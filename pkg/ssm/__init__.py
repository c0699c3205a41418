"""
Time-domain branch: diagonal linear state-space recurrence with BPTT.
"""

from .params import SsmParams, ssm_init
from .scan import SsmCache, SsmGrads, ssm_forward, ssm_backward, POOLING_MODES

__all__ = [
    "SsmParams",
    "ssm_init",
    "SsmCache",
    "SsmGrads",
    "ssm_forward",
    "ssm_backward",
    "POOLING_MODES",
]

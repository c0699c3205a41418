"""
Student-t machinery for multi-seed comparisons.

The t CDF comes from the regularized incomplete beta function
(scipy.special.betainc); quantiles are found by bisection on that CDF.
"""

import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import betainc

from errors import ConfigurationError, DataError

QUANTILE_TOLERANCE = 1e-9
DEFAULT_LEVEL = 0.95


class ConfidenceInterval(NamedTuple):
    mean: float
    low: float
    high: float

    @property
    def half_width(self) -> float:
        return self.high - self.mean


class WelchResult(NamedTuple):
    t: float
    df: float
    p: float


def student_t_cdf(t: float, df: float) -> float:
    """P(T <= t) for Student's t with `df` degrees of freedom."""
    if df <= 0:
        raise ConfigurationError(f"degrees of freedom must be > 0, got {df}", stage="student_t")
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return 1.0 - tail if t >= 0 else tail


def t_quantile(q: float, df: float, tolerance: float = QUANTILE_TOLERANCE) -> float:
    """Inverse of student_t_cdf by bisection, to within `tolerance` in t."""
    if not 0.0 < q < 1.0:
        raise ConfigurationError(f"quantile must be in (0, 1), got {q}", stage="student_t")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -t_quantile(1.0 - q, df, tolerance)
    low, high = 0.0, 1.0
    while student_t_cdf(high, df) < q:
        low, high = high, high * 2.0
    while high - low > tolerance:
        middle = 0.5 * (low + high)
        if student_t_cdf(middle, df) < q:
            low = middle
        else:
            high = middle
    return 0.5 * (low + high)


def _sample(values: Sequence[float], stage: str) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64).reshape(-1)
    if array.size < 2:
        raise DataError(f"need at least 2 values, got {array.size}", stage=stage)
    if not np.all(np.isfinite(array)):
        raise DataError("values must be finite", stage=stage)
    return array


def confidence_interval(values: Sequence[float], level: float = DEFAULT_LEVEL) -> ConfidenceInterval:
    """
    Two-sided t interval for the mean: mean +- t_{(1+level)/2, n-1} * s / sqrt(n).

    A zero-variance sample gives the degenerate interval (mean, mean, mean).

    Raises:
        DataError: If fewer than 2 values are given
    """
    if not 0.0 < level < 1.0:
        raise ConfigurationError(f"level must be in (0, 1), got {level}", stage="confidence_interval")
    array = _sample(values, "confidence_interval")
    mean = float(array.mean())
    spread = float(array.std(ddof=1))
    if spread == 0.0:
        return ConfidenceInterval(mean, mean, mean)
    half = t_quantile((1.0 + level) / 2.0, array.size - 1) * spread / math.sqrt(array.size)
    return ConfidenceInterval(mean, mean - half, mean + half)


def welch_t_test(a: Sequence[float], b: Sequence[float]) -> WelchResult:
    """
    Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom.

    When both samples have zero variance: p = 1 if the means are equal,
    p = 0 otherwise (t is 0 or +-inf accordingly).

    Raises:
        DataError: If either sample has fewer than 2 values
    """
    a = _sample(a, "welch_t_test")
    b = _sample(b, "welch_t_test")
    mean_a, mean_b = float(a.mean()), float(b.mean())
    share_a = float(a.var(ddof=1)) / a.size
    share_b = float(b.var(ddof=1)) / b.size
    pooled = share_a + share_b
    if pooled == 0.0:
        df = float(a.size + b.size - 2)
        if mean_a == mean_b:
            return WelchResult(0.0, df, 1.0)
        return WelchResult(math.copysign(math.inf, mean_a - mean_b), df, 0.0)

    t = (mean_a - mean_b) / math.sqrt(pooled)
    df = pooled ** 2 / (share_a ** 2 / (a.size - 1) + share_b ** 2 / (b.size - 1))
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return WelchResult(float(t), float(df), min(1.0, max(0.0, p)))

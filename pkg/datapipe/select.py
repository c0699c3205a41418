"""
Feature selection: Pearson correlation filter against the label, and
recursive feature elimination driven by a small logistic model.
"""

import logging
from typing import List

import numpy as np

from datapipe.flows import FlowTable
from datapipe.normalize import minmax_fit, minmax_apply
from errors import ConfigurationError, DataError
from numerics import AdamState, adam_step

logger = logging.getLogger(__name__)

DEFAULT_CORRELATION_THRESHOLD = 0.05
LOGISTIC_EPOCHS = 5
LOGISTIC_LR = 0.1
LOGISTIC_BATCH = 32


def label_correlations(table: FlowTable) -> np.ndarray:
    """Pearson r of every feature with the label; NaN where undefined."""
    x = table.features - table.features.mean(axis=0)
    y = table.labels - table.labels.mean()
    denominator = np.sqrt((x * x).sum(axis=0) * (y * y).sum())
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (x * y[:, None]).sum(axis=0) / denominator
    return np.where(denominator > 0, r, np.nan)


def correlation_filter(table: FlowTable, threshold: float = DEFAULT_CORRELATION_THRESHOLD) -> List[int]:
    """
    Keep features whose |r| with the label reaches `threshold`.

    Constant features (undefined r) are dropped. At least one feature is
    always kept: the one with the highest |r|, or the first one when every r
    is undefined.

    Returns:
        Sorted kept column indices
    """
    if table.rows < 2:
        raise DataError("correlation analysis needs at least 2 rows", stage="correlation_filter")
    r = np.abs(label_correlations(table))
    kept = [i for i in range(table.width) if np.isfinite(r[i]) and r[i] >= threshold]
    if not kept:
        best = int(np.nanargmax(r)) if np.any(np.isfinite(r)) else 0
        logger.warning(f"No feature reaches |r| >= {threshold}; keeping '{table.columns[best]}'")
        kept = [best]
    dropped = table.width - len(kept)
    if dropped:
        logger.info(f"Correlation filter dropped {dropped} of {table.width} features")
    return kept


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def fit_logistic(features: np.ndarray, labels: np.ndarray, rng, epochs: int = LOGISTIC_EPOCHS) -> np.ndarray:
    """Logistic regression (one affine layer) trained with Adam; returns the weights."""
    count, width = features.shape
    weights, bias = np.zeros(width), np.zeros(1)
    w_state, b_state = AdamState.zeros_like(weights, lr=LOGISTIC_LR), AdamState.zeros_like(bias, lr=LOGISTIC_LR)
    for _ in range(epochs):
        order = rng.permutation(count)
        for start in range(0, count, LOGISTIC_BATCH):
            batch = order[start:start + LOGISTIC_BATCH]
            residual = _sigmoid(features[batch] @ weights + bias[0]) - labels[batch]
            grad_w = features[batch].T @ residual / len(batch)
            grad_b = np.array([residual.mean()])
            weights, w_state = adam_step(w_state, weights, grad_w)
            bias, b_state = adam_step(b_state, bias, grad_b)
    return weights


def rfe(table: FlowTable, keep_k: int, rng, epochs: int = LOGISTIC_EPOCHS) -> List[int]:
    """
    Recursive feature elimination.

    Fits a logistic model on min-max normalized features, drops the feature
    with the smallest |weight|, refits, and repeats until `keep_k` remain.

    Args:
        table: Training rows only
        keep_k: Number of features to keep
        rng: Rng for logistic-model shuffling

    Returns:
        Sorted kept column indices

    Raises:
        ConfigurationError: If keep_k < 1 or keep_k exceeds the feature count
    """
    if keep_k < 1 or keep_k > table.width:
        raise ConfigurationError(f"keep_k must be in [1, {table.width}], got {keep_k}", stage="rfe")
    features = minmax_apply(minmax_fit(table), table.features)
    labels = table.labels.astype(np.float64)
    remaining = list(range(table.width))
    round_index = 0
    while len(remaining) > keep_k:
        weights = fit_logistic(features[:, remaining], labels, rng.derive(f"round{round_index}"), epochs)
        weakest = int(np.argmin(np.abs(weights)))
        logger.debug(f"RFE dropping '{table.columns[remaining[weakest]]}' (|w|={abs(weights[weakest]):.4f})")
        del remaining[weakest]
        round_index += 1
    return sorted(remaining)

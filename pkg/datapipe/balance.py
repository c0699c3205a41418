"""
Class balancing: SMOTE oversampling of the minority class and random
undersampling of the majority class.

Window sets are balanced in flattened W*F space, since windows are what the
learner consumes.
"""

import logging
import math
from typing import Tuple

import numpy as np
from sklearn.neighbors import NearestNeighbors

from errors import ConfigurationError, DataError

logger = logging.getLogger(__name__)

DEFAULT_K_NEIGHBORS = 5
DEFAULT_BALANCE_RATIO = 1.0


def _neighbor_table(minority: np.ndarray, k: int) -> np.ndarray:
    """k nearest minority neighbours of every minority row, excluding the row itself."""
    count = minority.shape[0]
    k = min(k, count - 1)
    search = NearestNeighbors(n_neighbors=min(k + 1, count), algorithm="brute", metric="euclidean")
    search.fit(minority)
    candidates = search.kneighbors(minority, return_distance=False)
    table = np.empty((count, k), dtype=np.int64)
    for i, row in enumerate(candidates):
        others = [j for j in row if j != i]
        table[i] = others[:k]
    return table


def smote_oversample(minority: np.ndarray, k: int, target: int, rng) -> np.ndarray:
    """
    Synthesize minority rows by interpolation.

    Each synthetic row is p + lambda * (q - p), with p drawn uniformly from the
    minority rows, q one of p's k nearest minority neighbours (Euclidean) and
    lambda uniform in [0, 1].

    Args:
        minority: (n, d) minority rows
        k: Neighbours considered per row
        target: Number of synthetic rows to produce
        rng: Rng stream

    Returns:
        (target, d) synthetic rows

    Raises:
        ConfigurationError: If k < 1 or target < 0
        DataError: If fewer than 2 minority rows are given
    """
    minority = np.asarray(minority, dtype=np.float64)
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}", stage="smote")
    if target < 0:
        raise ConfigurationError(f"target must be >= 0, got {target}", stage="smote")
    if minority.ndim != 2 or minority.shape[0] < 2:
        raise DataError("SMOTE needs at least 2 minority rows to interpolate", stage="smote")
    if target == 0:
        return np.empty((0, minority.shape[1]))

    neighbors = _neighbor_table(minority, k)
    anchors = rng.integers(0, minority.shape[0], size=target)
    picks = rng.integers(0, neighbors.shape[1], size=target)
    lam = rng.random(target)[:, None]
    p = minority[anchors]
    q = minority[neighbors[anchors, picks]]
    return p + lam * (q - p)


def undersample(majority: np.ndarray, target: int, rng) -> np.ndarray:
    """
    Uniform sample without replacement.

    Returns:
        (target, ...) subset; order is not the original order

    Raises:
        ConfigurationError: If target exceeds the available rows or is negative
    """
    majority = np.asarray(majority)
    if not 0 <= target <= majority.shape[0]:
        raise ConfigurationError(f"undersample target {target} not in [0, {majority.shape[0]}]", stage="undersample")
    return majority[rng.permutation(majority.shape[0])[:target]]


def balance_windows(
    windows: np.ndarray,
    labels: np.ndarray,
    rng,
    k: int = DEFAULT_K_NEIGHBORS,
    ratio: float = DEFAULT_BALANCE_RATIO,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Balance a labeled window stack.

    The majority class is undersampled to half the total window count (never
    grown), then the minority class is grown by SMOTE to `ratio` times the
    majority size. A minority with fewer than 2 windows is left as is.

    Returns:
        (windows, labels) shuffled with a seeded permutation
    """
    windows = np.asarray(windows, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if ratio <= 0:
        raise ConfigurationError(f"balance ratio must be > 0, got {ratio}", stage="balance")
    positives = int(labels.sum())
    negatives = labels.shape[0] - positives
    if positives == 0 or negatives == 0:
        logger.warning("Only one class present; skipping balancing")
        return windows, labels

    minority_label = 1 if positives <= negatives else 0
    minority = windows[labels == minority_label]
    majority = windows[labels != minority_label]
    shape = windows.shape[1:]

    majority_target = min(majority.shape[0], math.ceil(labels.shape[0] / 2))
    majority = undersample(majority, majority_target, rng.derive("undersample"))

    minority_target = int(round(majority_target * ratio))
    extra = max(0, minority_target - minority.shape[0])
    if extra and minority.shape[0] >= 2:
        flat = minority.reshape(minority.shape[0], -1)
        synthetic = smote_oversample(flat, k, extra, rng.derive("smote")).reshape((extra,) + shape)
        minority = np.concatenate([minority, synthetic])
    elif extra:
        logger.warning("Minority class has fewer than 2 windows; skipping SMOTE")

    balanced = np.concatenate([minority, majority])
    balanced_labels = np.concatenate([
        np.full(minority.shape[0], minority_label, dtype=np.int64),
        np.full(majority.shape[0], 1 - minority_label, dtype=np.int64),
    ])
    order = rng.derive("shuffle").permutation(balanced.shape[0])
    logger.info(
        f"Balanced windows: {positives} pos / {negatives} neg -> "
        f"{int(balanced_labels.sum())} pos / {int((balanced_labels == 0).sum())} neg"
    )
    return balanced[order], balanced_labels[order]

"""
Classification and regression metrics.

Positive class = anomalous. Metrics are fractions; a metric whose denominator
is zero is None ("undefined"), never 0 or NaN, and the report layer prints it
as "n/a".
"""

from dataclasses import dataclass, asdict
from typing import Dict, Optional

import numpy as np

from errors import DataError

CLASSIFY_METRICS = ("accuracy", "precision", "recall", "f1")
REGRESS_METRICS = ("mae", "mse")


@dataclass(frozen=True)
class Confusion:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn)

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


def _binary(values, name: str) -> np.ndarray:
    array = np.asarray(values).reshape(-1)
    if not np.all(np.isin(array, (0, 1))):
        raise DataError(f"{name} must be binary 0/1", stage="confusion")
    return array.astype(np.int64)


def confusion(labels, predictions) -> Confusion:
    """
    Count TP/TN/FP/FN with 1 = anomalous.

    Raises:
        DataError: On a length mismatch or non-binary values
    """
    labels = _binary(labels, "labels")
    predictions = _binary(predictions, "predictions")
    if labels.shape != predictions.shape:
        raise DataError(f"{labels.shape[0]} labels vs {predictions.shape[0]} predictions", stage="confusion")
    return Confusion(
        tp=int(np.sum((labels == 1) & (predictions == 1))),
        tn=int(np.sum((labels == 0) & (predictions == 0))),
        fp=int(np.sum((labels == 0) & (predictions == 1))),
        fn=int(np.sum((labels == 1) & (predictions == 0))),
    )


def accuracy(c: Confusion) -> Optional[float]:
    return (c.tp + c.tn) / c.total if c.total else None


def recall(c: Confusion) -> Optional[float]:
    return c.tp / (c.tp + c.fn) if c.tp + c.fn else None


def precision(c: Confusion) -> Optional[float]:
    return c.tp / (c.tp + c.fp) if c.tp + c.fp else None


def f1(c: Confusion) -> Optional[float]:
    p, r = precision(c), recall(c)
    if p is None or r is None or p + r == 0:
        return None
    return 2.0 * p * r / (p + r)


def classification_metrics(c: Confusion) -> Dict[str, Optional[float]]:
    return {"accuracy": accuracy(c), "precision": precision(c), "recall": recall(c), "f1": f1(c)}


def _errors(preds, actuals, stage: str) -> np.ndarray:
    preds = np.asarray(preds, dtype=np.float64).reshape(-1)
    actuals = np.asarray(actuals, dtype=np.float64).reshape(-1)
    if preds.shape != actuals.shape:
        raise DataError(f"{preds.shape[0]} predictions vs {actuals.shape[0]} actuals", stage=stage)
    if preds.size == 0:
        raise DataError("no samples", stage=stage)
    if not (np.all(np.isfinite(preds)) and np.all(np.isfinite(actuals))):
        raise DataError("non-finite values", stage=stage)
    return preds - actuals


def mae(preds, actuals) -> float:
    return float(np.mean(np.abs(_errors(preds, actuals, "mae"))))


def mse(preds, actuals) -> float:
    return float(np.mean(_errors(preds, actuals, "mse") ** 2))


def regression_metrics(preds, actuals) -> Dict[str, float]:
    return {"mae": mae(preds, actuals), "mse": mse(preds, actuals)}


def grouped_metrics(labels, predictions, tags) -> Dict[str, Dict[str, object]]:
    """
    Confusion and metrics per tag value.

    Returns:
        {tag: {"confusion": Confusion, "accuracy": ..., "precision": ..., "recall": ..., "f1": ...}}
        in sorted tag order

    Raises:
        DataError: If tags do not align with the samples
    """
    labels = np.asarray(labels).reshape(-1)
    predictions = np.asarray(predictions).reshape(-1)
    tags = np.asarray(tags, dtype=object).reshape(-1)
    if not labels.shape == predictions.shape == tags.shape:
        raise DataError(
            f"{labels.shape[0]} labels, {predictions.shape[0]} predictions, {tags.shape[0]} tags",
            stage="grouped_metrics",
        )
    groups = {}
    for tag in sorted(set(tags.tolist()), key=str):
        members = tags == tag
        c = confusion(labels[members], predictions[members])
        groups[str(tag)] = {"confusion": c, **classification_metrics(c)}
    return groups

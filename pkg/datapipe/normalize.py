"""
Min-max normalization fitted on training rows only.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from datapipe.flows import FlowTable
from errors import DataError


@dataclass
class NormStats:
    minimum: np.ndarray
    maximum: np.ndarray
    fitted_rows: int

    @property
    def span(self) -> np.ndarray:
        return self.maximum - self.minimum


def minmax_fit(table: FlowTable, rows: Optional[range] = None) -> NormStats:
    """
    Fit per-feature min and max.

    Args:
        table: Source table
        rows: Training-row range; the whole table when None

    Raises:
        DataError: If the range selects no rows
    """
    rows = range(table.rows) if rows is None else rows
    block = table.features[rows.start:rows.stop:rows.step]
    if block.shape[0] == 0:
        raise DataError("normalization fit range is empty", stage="minmax_fit")
    return NormStats(minimum=block.min(axis=0), maximum=block.max(axis=0), fitted_rows=block.shape[0])


def minmax_apply(stats: NormStats, rows: np.ndarray) -> np.ndarray:
    """
    Scale to [0, 1] with the fitted stats.

    Values outside the fitted range are clamped; a constant feature
    (max == min) maps to 0.
    """
    rows = np.asarray(rows, dtype=np.float64)
    span = stats.span
    constant = span <= 0
    scaled = (rows - stats.minimum) / np.where(constant, 1.0, span)
    scaled = np.where(constant, 0.0, scaled)
    return np.clip(scaled, 0.0, 1.0)

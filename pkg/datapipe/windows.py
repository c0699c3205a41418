"""
Sliding windows over a (normalized) flow table.

Windows start at 0, hop, 2*hop, ... and always lie fully inside the series.
Classify labels use the "any" rule (any anomalous row marks the window) or
the "fraction" rule (at least `fraction` of the rows anomalous). Regress
labels are the target feature's value at the row right after the window.
"""

from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from datapipe.flows import FlowTable, NORMAL_TAG
from errors import ConfigurationError, DataError

LABEL_RULES = ("any", "fraction")


@dataclass
class WindowSet:
    windows: np.ndarray          # (n, W, F)
    labels: np.ndarray           # (n,) int for classify, float for regress
    starts: np.ndarray           # (n,) start row of each window
    window: int
    hop: int
    label_rule: str
    tags: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.windows.shape[0]


def window_count(rows: int, window: int, hop: int) -> int:
    return (rows - window) // hop + 1 if rows >= window else 0


def _dominant_tag(tags: np.ndarray, labels: np.ndarray) -> str:
    anomalous = [t for t, y in zip(tags, labels) if y == 1 and t != NORMAL_TAG]
    if not anomalous:
        return NORMAL_TAG if not labels.any() else "unknown"
    return Counter(anomalous).most_common(1)[0][0]


def make_windows(
    table: FlowTable,
    window: int,
    hop: int = 1,
    label_rule: str = "any",
    fraction: float = 0.5,
    task: str = "classify",
    target_index: int = 0,
) -> WindowSet:
    """
    Slice a table into windows.

    Args:
        table: Rows in chronological order (normally already normalized)
        window: W, rows per window
        hop: Distance between window starts
        label_rule: "any" or "fraction" (classify only)
        fraction: Threshold for the "fraction" rule
        task: "classify" or "regress"
        target_index: Feature column forecast in regress mode

    Returns:
        WindowSet in chronological order

    Raises:
        ConfigurationError: If hop < 1 or the rule is unknown
        DataError: If the table is shorter than one window
    """
    if hop < 1:
        raise ConfigurationError(f"hop must be >= 1, got {hop}", stage="windows")
    if window < 1:
        raise ConfigurationError(f"window must be >= 1, got {window}", stage="windows")
    if label_rule not in LABEL_RULES:
        raise ConfigurationError(f"label rule must be one of {LABEL_RULES}", stage="windows")
    usable_rows = table.rows - 1 if task == "regress" else table.rows
    if window > usable_rows:
        raise DataError(f"window {window} longer than the {table.rows} available rows", stage="windows")

    count = window_count(usable_rows, window, hop)
    starts = np.arange(count) * hop
    stacked = sliding_window_view(table.features[:usable_rows], window, axis=0)[::hop]  # (n, F, W)
    windows = np.ascontiguousarray(np.swapaxes(stacked, 1, 2))

    row_labels = sliding_window_view(table.labels[:usable_rows], window)[::hop]
    if task == "regress":
        if not 0 <= target_index < table.width:
            raise ConfigurationError(f"target index {target_index} outside {table.width} features", stage="windows")
        labels = table.features[starts + window, target_index].astype(np.float64)
    elif label_rule == "any":
        labels = row_labels.any(axis=1).astype(np.int64)
    else:
        labels = (row_labels.mean(axis=1) >= fraction).astype(np.int64)

    tags = None
    if table.tags is not None:
        tag_windows = table.tags[starts[:, None] + np.arange(window)]
        tags = np.array([_dominant_tag(t, y) for t, y in zip(tag_windows, row_labels)], dtype=object)

    return WindowSet(windows=windows, labels=labels, starts=starts, window=window, hop=hop, label_rule=label_rule, tags=tags)

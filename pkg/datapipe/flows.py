"""
Flow-record tables: CSV ingestion and export.

A column counts as numeric when most of its cells parse as finite floats;
other feature columns are dropped with a warning. Rows with an unparseable
cell in a numeric column, or a label outside {0, 1}, are dropped and counted.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from errors import DataError

logger = logging.getLogger(__name__)

DEFAULT_LABEL_COLUMN = "label"
DEFAULT_TAG_COLUMN = "event_type"
NORMAL_TAG = "normal"


@dataclass
class FlowTable:
    columns: List[str]
    features: np.ndarray          # (R, F_raw) float64
    labels: np.ndarray            # (R,) int64 in {0, 1}
    provenance: str = ""
    tags: Optional[np.ndarray] = None   # (R,) event-type strings, when known
    dropped_rows: int = 0
    dropped_columns: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise DataError(
                f"features {self.features.shape} and labels {self.labels.shape} do not align", stage="flows"
            )
        if self.features.shape[1] != len(self.columns):
            raise DataError(f"{len(self.columns)} column names for {self.features.shape[1]} features", stage="flows")
        if not np.all(np.isin(self.labels, (0, 1))):
            raise DataError("labels must be 0 or 1", stage="flows")

    @property
    def rows(self) -> int:
        return self.features.shape[0]

    @property
    def width(self) -> int:
        return self.features.shape[1]

    def slice(self, start: int, stop: int) -> "FlowTable":
        """Contiguous row range [start, stop)."""
        return FlowTable(
            columns=list(self.columns),
            features=self.features[start:stop].copy(),
            labels=self.labels[start:stop].copy(),
            provenance=f"{self.provenance}[{start}:{stop}]",
            tags=None if self.tags is None else self.tags[start:stop].copy(),
        )

    def select(self, indices: List[int]) -> "FlowTable":
        """Keep only the given feature columns, in the given order."""
        return FlowTable(
            columns=[self.columns[i] for i in indices],
            features=self.features[:, indices].copy(),
            labels=self.labels.copy(),
            provenance=self.provenance,
            tags=None if self.tags is None else self.tags.copy(),
        )


def load_flows(
    path,
    label_column: str = DEFAULT_LABEL_COLUMN,
    tag_column: Optional[str] = DEFAULT_TAG_COLUMN,
) -> FlowTable:
    """
    Load a flow-record CSV.

    Args:
        path: UTF-8, comma-separated file with a header row
        label_column: Binary label column (1 = anomalous)
        tag_column: Optional event-type column kept as group tags, not as a feature

    Returns:
        FlowTable of the numeric feature columns

    Raises:
        DataError: Missing file, missing label column, or no usable rows
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}", stage="load_flows")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataError(f"cannot parse {path}: {e}", stage="load_flows") from e
    frame.columns = [str(c).strip() for c in frame.columns]
    if label_column not in frame.columns:
        raise DataError(f"label column '{label_column}' not in {path}", stage="load_flows")

    tags = None
    if tag_column and tag_column in frame.columns:
        tags = frame[tag_column].str.strip().replace("", NORMAL_TAG).to_numpy(dtype=object)

    candidates = [c for c in frame.columns if c not in (label_column, tag_column)]
    parsed = {}
    dropped_columns = []
    for column in candidates:
        values = pd.to_numeric(frame[column].str.strip(), errors="coerce")
        values = values.where(np.isfinite(values))
        if len(values) and values.notna().mean() > 0.5:
            parsed[column] = values
        else:
            dropped_columns.append(column)
    if dropped_columns:
        logger.warning(f"Dropped {len(dropped_columns)} non-numeric columns: {dropped_columns}")

    labels = pd.to_numeric(frame[label_column].str.strip(), errors="coerce")
    numeric = pd.DataFrame(parsed, index=frame.index)
    good = numeric.notna().all(axis=1) & labels.isin([0, 1])
    dropped_rows = int((~good).sum())
    if dropped_rows:
        logger.warning(f"Dropped {dropped_rows} rows with unparseable cells or labels")
    if not good.any():
        raise DataError(f"no usable rows in {path}", stage="load_flows")
    if not parsed:
        raise DataError(f"no numeric feature columns in {path}", stage="load_flows")

    return FlowTable(
        columns=list(parsed.keys()),
        features=numeric[good].to_numpy(dtype=np.float64),
        labels=labels[good].to_numpy(dtype=np.int64),
        provenance=str(path),
        tags=None if tags is None else tags[good.to_numpy()],
        dropped_rows=dropped_rows,
        dropped_columns=dropped_columns,
    )


def write_flows(table: FlowTable, path, label_column: str = DEFAULT_LABEL_COLUMN, tag_column: str = DEFAULT_TAG_COLUMN) -> Path:
    """Write a FlowTable as CSV with 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(table.features, columns=table.columns)
    frame[label_column] = table.labels
    if table.tags is not None:
        frame[tag_column] = table.tags
    frame.to_csv(path, index=False, float_format="%.17g")
    return path

"""
One seeded end-to-end run: chronological split, feature selection and
normalization fitted on the training rows, windowing, balancing, training,
prediction and metrics.
"""

import logging
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional

import numpy as np

from datapipe import (
    FlowTable,
    NormStats,
    WindowSet,
    balance_windows,
    correlation_filter,
    make_windows,
    minmax_apply,
    minmax_fit,
    rfe,
)
from errors import ConfigurationError, DataError
from evaluation.metrics import Confusion, confusion, classification_metrics, grouped_metrics, regression_metrics
from fusion import ModelConfig, ModelParams, fit, model_init, predict
from numerics import Rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentSettings:
    """Everything a run needs besides the data and the seed. Field names match the config-file keys."""

    window_w: int = 32
    hop: int = 1
    state_dim: int = 16
    fusion_dim: int = 16
    spectral_bins: int = 0  # 0 = auto
    taper: str = "hann"
    pooling: str = "last"
    task: str = "classify"
    variant: str = "full"
    dropout: float = 0.3
    threshold: float = 0.5
    lr: float = 0.001
    batch_size: int = 32
    epochs: int = 20
    split_fraction: float = 0.7
    validation_fraction: float = 0.2
    label_rule: str = "any"
    label_fraction: float = 0.5
    target_feature: str = ""
    correlation_threshold: float = 0.05
    rfe_keep: int = 0
    smote_k: int = 5
    balance: bool = True
    balance_ratio: float = 1.0

    @classmethod
    def keys(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    def with_values(self, **values: Any) -> "ExperimentSettings":
        unknown = [key for key in values if key not in self.keys()]
        if unknown:
            raise ConfigurationError(f"unknown settings {unknown}", stage="settings")
        return replace(self, **values)

    def model_config(self, features: int, variant: Optional[str] = None) -> ModelConfig:
        return ModelConfig(
            window=self.window_w,
            features=features,
            state_dim=self.state_dim,
            fusion_dim=self.fusion_dim,
            spectral_bins=self.spectral_bins or None,
            task=self.task,
            variant=variant or self.variant,
            dropout=self.dropout,
            threshold=self.threshold,
            taper=self.taper,
            pooling=self.pooling,
        )


@dataclass
class PreparedData:
    train: WindowSet                  # balanced in classify mode
    test: WindowSet
    selected: List[int]               # indices into the source table's columns
    columns: List[str]                # names of the selected columns
    norm: NormStats
    target_index: int = 0


@dataclass
class RunResult:
    variant: str
    seed: int
    metrics: Dict[str, Optional[float]]
    trace: List[float]
    confusion: Optional[Confusion] = None
    groups: Dict[str, Dict[str, object]] = field(default_factory=dict)
    scores: Optional[np.ndarray] = None


def split_rows(rows: int, fraction: float) -> int:
    """First test row of a chronological split."""
    if not 0.0 < fraction < 1.0:
        raise ConfigurationError(f"split fraction must be in (0, 1), got {fraction}", stage="split")
    cut = int(round(rows * fraction))
    if cut < 1 or cut >= rows:
        raise DataError(f"split of {rows} rows at {fraction} leaves an empty side", stage="split")
    return cut


def select_features(train: FlowTable, settings: ExperimentSettings, rng: Rng) -> List[int]:
    """Correlation filter then optional RFE, both on training rows. Regress keeps every feature."""
    if settings.task == "regress":
        return list(range(train.width))
    kept = correlation_filter(train, settings.correlation_threshold)
    if 0 < settings.rfe_keep < len(kept):
        survivors = rfe(train.select(kept), settings.rfe_keep, rng.derive("rfe"))
        kept = [kept[i] for i in survivors]
    return kept


def _target_index(columns: List[str], settings: ExperimentSettings) -> int:
    if settings.task != "regress" or not settings.target_feature:
        return 0
    if settings.target_feature not in columns:
        raise ConfigurationError(f"target feature '{settings.target_feature}' not among {columns}", stage="prepare")
    return columns.index(settings.target_feature)


def prepare_data(table: FlowTable, settings: ExperimentSettings, seed: int) -> PreparedData:
    """
    Turn a raw table into train/test window sets without leaking test rows.

    Selection and NormStats see only rows before the split point.
    """
    rng = Rng(seed, "prepare")
    cut = split_rows(table.rows, settings.split_fraction)
    train_rows = table.slice(0, cut)
    test_rows = table.slice(cut, table.rows)

    selected = select_features(train_rows, settings, rng)
    train_rows, test_rows = train_rows.select(selected), test_rows.select(selected)
    norm = minmax_fit(train_rows)
    train_rows.features = minmax_apply(norm, train_rows.features)
    test_rows.features = minmax_apply(norm, test_rows.features)
    target = _target_index(train_rows.columns, settings)

    def windows(rows: FlowTable) -> WindowSet:
        return make_windows(
            rows,
            settings.window_w,
            hop=settings.hop,
            label_rule=settings.label_rule,
            fraction=settings.label_fraction,
            task=settings.task,
            target_index=target,
        )

    train, test = windows(train_rows), windows(test_rows)
    if settings.task == "classify" and settings.balance:
        balanced, labels = balance_windows(
            train.windows, train.labels, rng.derive("balance"), k=settings.smote_k, ratio=settings.balance_ratio
        )
        train = replace(train, windows=balanced, labels=labels, starts=np.full(labels.shape[0], -1), tags=None)

    logger.info(
        f"Prepared seed {seed}: {len(train)} train / {len(test)} test windows, "
        f"{len(selected)} of {table.width} features"
    )
    return PreparedData(
        train=train,
        test=test,
        selected=selected,
        columns=list(train_rows.columns),
        norm=norm,
        target_index=target,
    )


def evaluate_windows(config: ModelConfig, params: ModelParams, data: WindowSet) -> RunResult:
    """Predict a window set and score it. variant/seed/trace are filled by the caller."""
    scores, hard = predict(params, config, data.windows)
    if config.task == "regress":
        return RunResult(config.variant, 0, regression_metrics(scores, data.labels), [], scores=scores)
    c = confusion(data.labels, hard)
    groups = grouped_metrics(data.labels, hard, data.tags) if data.tags is not None else {}
    return RunResult(config.variant, 0, classification_metrics(c), [], confusion=c, groups=groups, scores=scores)


def train_model(
    prepared: PreparedData, settings: ExperimentSettings, seed: int, variant: Optional[str] = None, progress: bool = False
):
    """Initialize and fit one model. Returns (config, params, loss_trace)."""
    config = settings.model_config(len(prepared.selected), variant)
    rng = Rng(seed, "model")
    params = model_init(config, rng.derive("init"))
    trained, trace = fit(
        params,
        config,
        prepared.train.windows,
        prepared.train.labels,
        epochs=settings.epochs,
        batch_size=settings.batch_size,
        rng=rng.derive("train"),
        lr=settings.lr,
        progress=progress,
    )
    return config, trained, trace


def run_experiment(
    table: FlowTable,
    settings: ExperimentSettings,
    seed: int,
    variant: Optional[str] = None,
    prepared: Optional[PreparedData] = None,
) -> RunResult:
    """
    Full pipeline for one (variant, seed).

    Args:
        table: Raw chronological table
        settings: Run settings
        seed: Seed for every random stream of this run
        variant: Overrides settings.variant
        prepared: Reuse data already prepared for this seed

    Raises:
        DataError / NumericFailure: Propagated from the pipeline stages
    """
    prepared = prepared or prepare_data(table, settings, seed)
    config, params, trace = train_model(prepared, settings, seed, variant)
    result = evaluate_windows(config, params, prepared.test)
    result.seed = seed
    result.trace = trace
    return result

"""
Evaluation module: metrics, t-statistics, seeded experiments, the ablation
harness, grid search and report emission.
"""

from .metrics import (
    Confusion,
    confusion,
    accuracy,
    precision,
    recall,
    f1,
    mae,
    mse,
    grouped_metrics,
    classification_metrics,
    regression_metrics,
    CLASSIFY_METRICS,
    REGRESS_METRICS,
)
from .stats import ConfidenceInterval, WelchResult, confidence_interval, welch_t_test, student_t_cdf, t_quantile
from .experiment import ExperimentSettings, PreparedData, RunResult, prepare_data, run_experiment, train_model
from .ablation import EvalReport, ReportRow, run_ablation
from .search import GridResult, SweepRow, grid_search, sensitivity_sweep, expand_grid
from .report import format_ci, format_table, write_report, write_run_metrics, write_grid, write_sweep

__all__ = [
    "Confusion",
    "confusion",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "mae",
    "mse",
    "grouped_metrics",
    "classification_metrics",
    "regression_metrics",
    "CLASSIFY_METRICS",
    "REGRESS_METRICS",
    "ConfidenceInterval",
    "WelchResult",
    "confidence_interval",
    "welch_t_test",
    "student_t_cdf",
    "t_quantile",
    "ExperimentSettings",
    "PreparedData",
    "RunResult",
    "prepare_data",
    "run_experiment",
    "train_model",
    "EvalReport",
    "ReportRow",
    "run_ablation",
    "GridResult",
    "SweepRow",
    "grid_search",
    "sensitivity_sweep",
    "expand_grid",
    "format_ci",
    "format_table",
    "write_report",
    "write_run_metrics",
    "write_grid",
    "write_sweep",
]

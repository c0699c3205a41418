"""
Hyperparameter grid search and one-at-a-time sensitivity sweeps.

Grid candidates are scored on a validation slice carved from the end of the
training portion; the test portion is never touched.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

from tqdm import tqdm

from datapipe import FlowTable
from errors import ConfigurationError, DataError, NumericFailure
from evaluation.experiment import ExperimentSettings, run_experiment, split_rows
from evaluation.stats import confidence_interval

logger = logging.getLogger(__name__)


@dataclass
class GridResult:
    best: ExperimentSettings
    best_values: Dict[str, Any]
    metric: str
    scores: List[Dict[str, Any]]   # one row per candidate, enumeration order


@dataclass
class SweepRow:
    key: str
    value: Any
    metric: str
    mean: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]
    values: List[float]


def selection_metric(task: str) -> str:
    return "mse" if task == "regress" else "f1"


def _better(score: Optional[float], best: Optional[float], metric: str) -> bool:
    if score is None:
        return False
    if best is None:
        return True
    return score < best if metric == "mse" else score > best


def expand_grid(grid: Dict[str, Sequence[Any]]) -> List[Dict[str, Any]]:
    """Cartesian product in declaration order (last key varies fastest)."""
    if not grid or any(len(values) == 0 for values in grid.values()):
        raise ConfigurationError("grid must name at least one key, each with at least one value", stage="grid_search")
    unknown = [key for key in grid if key not in ExperimentSettings.keys()]
    if unknown:
        raise ConfigurationError(f"unknown grid keys {unknown}", stage="grid_search")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def grid_search(
    table: FlowTable,
    settings: ExperimentSettings,
    grid: Dict[str, Sequence[Any]],
    validation_fraction: Optional[float] = None,
    seed: int = 42,
    progress: bool = False,
) -> GridResult:
    """
    Pick the candidate with the best validation score.

    Each candidate trains on the first (1 - validation_fraction) of the
    training portion and is scored on the rest: F1 for classify (higher is
    better), MSE for regress (lower is better). Ties keep the first
    enumerated candidate. A candidate whose run fails scores None.

    Raises:
        ConfigurationError: On an empty grid or unknown keys
    """
    candidates = expand_grid(grid)
    fraction = settings.validation_fraction if validation_fraction is None else validation_fraction
    if not 0.0 < fraction < 1.0:
        raise ConfigurationError(f"validation fraction must be in (0, 1), got {fraction}", stage="grid_search")
    training = table.slice(0, split_rows(table.rows, settings.split_fraction))
    metric = selection_metric(settings.task)

    scores: List[Dict[str, Any]] = []
    best_index, best_score = 0, None
    for index, values in enumerate(tqdm(candidates, desc="Grid search", disable=not progress)):
        candidate = settings.with_values(split_fraction=1.0 - fraction, **values)
        try:
            score = run_experiment(training, candidate, seed).metrics.get(metric)
        except (ConfigurationError, DataError, NumericFailure) as e:
            logger.warning(f"Candidate {values} failed: {e}")
            score = None
        scores.append({**values, metric: score})
        if _better(score, best_score, metric):
            best_index, best_score = index, score

    best_values = candidates[best_index]
    logger.info(f"Best of {len(candidates)} candidates: {best_values} ({metric}={best_score})")
    return GridResult(best=settings.with_values(**best_values), best_values=best_values, metric=metric, scores=scores)


def sensitivity_sweep(
    table: FlowTable,
    settings: ExperimentSettings,
    key: str,
    values: Sequence[Any],
    seeds: Sequence[int],
    progress: bool = False,
) -> List[SweepRow]:
    """
    Vary one setting, holding the rest fixed, and report the mean selection
    metric with a 95% CI over seeds for each value.
    """
    if key not in ExperimentSettings.keys():
        raise ConfigurationError(f"unknown sweep key '{key}'", stage="sensitivity")
    if not values:
        raise ConfigurationError("sweep needs at least one value", stage="sensitivity")
    seeds = sorted(set(int(s) for s in seeds))
    metric = selection_metric(settings.task)
    rows = []
    for value in tqdm(values, desc=f"Sweep {key}", disable=not progress):
        candidate = settings.with_values(**{key: value})
        samples = []
        for seed in seeds:
            score = run_experiment(table, candidate, seed).metrics.get(metric)
            if score is not None:
                samples.append(score)
        mean = low = high = None
        if len(samples) >= 2:
            mean, low, high = confidence_interval(samples)
        elif samples:
            mean = samples[0]
        rows.append(SweepRow(key, value, metric, mean, low, high, samples))
    return rows

"""
Main MamNet module that ties together data loading, training, checkpoints,
prediction and latency measurement for the command line.
"""

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from cli.checkpoint import Checkpoint
from cli.config import RunConfig, parse_synth_spec, render_synth_spec
from datapipe import FlowTable, SynthSpec, WindowSet, load_flows, make_windows, minmax_apply, synth_generate, write_flows
from errors import DataError, UsageError
from evaluation import RunResult, prepare_data, train_model
from evaluation.experiment import evaluate_windows, split_rows
from fusion import ModelConfig, ModelParams, forward, predict

logger = logging.getLogger(__name__)

LATENCY_TARGET_MS = 20.0
LATENCY_WINDOWS = 1000


@dataclass
class LatencyStats:
    mean_ms: float
    p50_ms: float
    p95_ms: float
    windows: int

    @property
    def within_target(self) -> bool:
        return self.mean_ms < LATENCY_TARGET_MS


def load_dataset(run_config: RunConfig, data_path: Optional[str] = None) -> FlowTable:
    """
    Flow table from --data, then data_path, then a synthetic spec.

    Raises:
        UsageError: If no data source is configured
        DataError: If the source cannot be read
    """
    source = data_path or run_config.data_path
    if source:
        return load_flows(source, label_column=run_config.label_column)
    if run_config.synth_spec_path:
        return synth_generate(parse_synth_spec(run_config.synth_spec_path))
    raise UsageError("no data: pass --data or set data_path / synth_spec_path", stage="data")


def train_from_table(
    table: FlowTable, run_config: RunConfig, seed: int, progress: bool = False
) -> Tuple[Checkpoint, List[float], RunResult]:
    """
    Prepare, train and score on the held-out split.

    Returns:
        (checkpoint, loss_trace, test_result)
    """
    settings = run_config.experiment()
    prepared = prepare_data(table, settings, seed)
    config, params, trace = train_model(prepared, settings, seed, progress=progress)
    result = evaluate_windows(config, params, prepared.test)
    result.seed, result.trace = seed, trace
    checkpoint = Checkpoint(
        run_config=run_config.with_values(seed=seed),
        model_config=config,
        params=params,
        norm=prepared.norm,
        selected=[int(i) for i in prepared.selected],
        columns=list(prepared.columns),
        target_index=prepared.target_index,
    )
    return checkpoint, trace, result


def checkpoint_windows(checkpoint: Checkpoint, table: FlowTable) -> WindowSet:
    """Window a raw table the way the checkpoint's training data was windowed."""
    missing = [c for c in checkpoint.columns if c not in table.columns]
    if missing:
        raise DataError(f"columns {missing} used by the model are absent from {table.provenance}", stage="predict")
    selected = table.select([table.columns.index(c) for c in checkpoint.columns])
    selected.features = minmax_apply(checkpoint.norm, selected.features)
    cfg = checkpoint.run_config
    return make_windows(
        selected,
        checkpoint.model_config.window,
        hop=cfg.hop,
        label_rule=cfg.label_rule,
        fraction=cfg.label_fraction,
        task=checkpoint.model_config.task,
        target_index=checkpoint.target_index,
    )


def predict_table(checkpoint: Checkpoint, table: FlowTable) -> Tuple[WindowSet, np.ndarray, Optional[np.ndarray]]:
    """Scores and hard labels for every window of a table."""
    windows = checkpoint_windows(checkpoint, table)
    scores, labels = predict(checkpoint.params, checkpoint.model_config, windows.windows)
    return windows, scores, labels


def evaluate_checkpoint(checkpoint: Checkpoint, table: FlowTable) -> RunResult:
    """Score a checkpoint on the rows after the configured split point."""
    cut = split_rows(table.rows, checkpoint.run_config.split_fraction)
    windows = checkpoint_windows(checkpoint, table.slice(cut, table.rows))
    result = evaluate_windows(checkpoint.model_config, checkpoint.params, windows)
    result.seed = checkpoint.run_config.seed
    return result


def measure_latency(
    params: ModelParams,
    config: ModelConfig,
    windows: np.ndarray,
    limit: int = LATENCY_WINDOWS,
    progress: bool = False,
) -> LatencyStats:
    """
    Wall-clock time of single-window eval-mode forward passes.

    Args:
        windows: (n, W, F); the first `limit` windows are timed one at a time

    Raises:
        DataError: If there are no windows
    """
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 3 or windows.shape[0] == 0:
        raise DataError("latency needs at least one window", stage="latency")
    sample = windows[:limit]
    forward(params, config, sample[0])  # warm caches
    timings = np.empty(sample.shape[0])
    for i, window in enumerate(tqdm(sample, desc="Latency", disable=not progress)):
        start = time.perf_counter()
        forward(params, config, window)
        timings[i] = (time.perf_counter() - start) * 1000.0
    stats = LatencyStats(
        mean_ms=float(timings.mean()),
        p50_ms=float(np.percentile(timings, 50)),
        p95_ms=float(np.percentile(timings, 95)),
        windows=int(sample.shape[0]),
    )
    logger.info(f"Latency over {stats.windows} windows: mean {stats.mean_ms:.3f} ms, p95 {stats.p95_ms:.3f} ms")
    return stats


def output_path(run_config: RunConfig, out: Optional[str], default_name: str) -> Path:
    return Path(out) if out else Path(run_config.output_dir) / default_name


def write_generated(spec: SynthSpec, path, run_hash: str = "") -> Tuple[Path, Path]:
    """
    Generate a synthetic table and write it as CSV plus a `<csv>.spec.txt`
    sidecar that parse_synth_spec can read back.
    """
    table = synth_generate(spec)
    csv_path = write_flows(table, path)
    sidecar = csv_path.with_name(csv_path.name + ".spec.txt")
    header = f"# generated {table.rows} rows, {int(table.labels.sum())} anomalous\n"
    if run_hash:
        header += f"# config_hash {run_hash}\n"
    sidecar.write_text(header + render_synth_spec(spec), encoding="utf-8")
    return csv_path, sidecar

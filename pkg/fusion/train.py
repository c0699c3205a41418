"""
Mini-batch training with Adam, and batched prediction.
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from errors import DataError, NumericFailure
from fusion.config import ModelConfig
from fusion.model import ModelParams, forward, backward, loss, loss_grad
from numerics import AdamState, adam_step
from numerics.optim import DEFAULT_LR
from spectral import spectral_features

logger = logging.getLogger(__name__)

DEFAULT_EPOCHS = 20
DEFAULT_BATCH_SIZE = 32
PREDICT_BATCH_SIZE = 256


def precompute_spectra(config: ModelConfig, windows: np.ndarray) -> Optional[np.ndarray]:
    """Spectral vectors for a window stack, or None when the variant has no frequency branch."""
    if config.variant not in ("full", "no_time"):
        return None
    return spectral_features(windows, config.spectral_bins, config.taper)


def fit(
    params: ModelParams,
    config: ModelConfig,
    windows: np.ndarray,
    labels: np.ndarray,
    epochs: int = DEFAULT_EPOCHS,
    batch_size: int = DEFAULT_BATCH_SIZE,
    rng=None,
    lr: float = DEFAULT_LR,
    progress: bool = False,
) -> Tuple[ModelParams, List[float]]:
    """
    Train a copy of `params` on labeled windows.

    Each epoch draws a seeded shuffle, walks mini-batches of `batch_size`
    (the last batch may be partial), averages gradients over the batch and
    takes one Adam step per parameter. Dropout is active.

    Args:
        params: Starting parameters (not modified)
        config: Model configuration
        windows: (n, W, F) training windows
        labels: (n,) targets; {0, 1} for classify
        epochs: Number of passes over the data
        batch_size: Mini-batch size
        rng: Rng for shuffling and dropout
        lr: Adam learning rate
        progress: Show a tqdm bar over epochs

    Returns:
        (trained_params, loss_trace) with one mean training loss per epoch

    Raises:
        DataError: On empty data, or a classify set missing a class
        NumericFailure: If a batch loss becomes NaN/inf
    """
    windows = np.asarray(windows, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if windows.ndim != 3 or windows.shape[0] == 0:
        raise DataError("no training windows", stage="train")
    if labels.shape != (windows.shape[0],):
        raise DataError(f"{labels.shape[0]} labels for {windows.shape[0]} windows", stage="train")
    if config.task == "classify":
        present = set(np.unique(labels).tolist())
        if not present <= {0.0, 1.0}:
            raise DataError(f"classify labels must be 0/1, got {sorted(present)}", stage="train")
        if present != {0.0, 1.0}:
            raise DataError("classify training needs both labels present", stage="train")
    if rng is None:
        raise DataError("fit needs an Rng", stage="train")

    trained = params.copy()
    if epochs <= 0:
        return trained, []

    spectra = precompute_spectra(config, windows)
    shuffle_rng = rng.derive("shuffle")
    dropout_rng = rng.derive("dropout")
    states: Dict[str, AdamState] = {
        name: AdamState.zeros_like(array, lr=lr) for name, array in trained.named_tensors().items()
    }
    count = windows.shape[0]
    trace: List[float] = []

    for epoch in tqdm(range(epochs), desc="Training", disable=not progress):
        order = shuffle_rng.permutation(count)
        total = 0.0
        for start in range(0, count, batch_size):
            batch = order[start:start + batch_size]
            spectrum = None if spectra is None else spectra[batch]
            _, cache = forward(trained, config, windows[batch], rng=dropout_rng, training=True, spectrum=spectrum)
            batch_loss = loss(cache.pre_activation, labels[batch], config.task)
            if not np.isfinite(batch_loss):
                raise NumericFailure(f"loss became {batch_loss} in epoch {epoch + 1}", stage="train")
            total += batch_loss * len(batch)

            grads = backward(trained, config, cache, loss_grad(cache.pre_activation, labels[batch], config.task))
            tensors = trained.named_tensors()
            for name, array in tensors.items():
                updated, states[name] = adam_step(states[name], array, grads[name])
                array[...] = updated
        trace.append(total / count)
        logger.debug(f"epoch {epoch + 1}/{epochs} loss={trace[-1]:.6f}")

    logger.info(f"Trained {config.variant} for {epochs} epochs: loss {trace[0]:.4f} -> {trace[-1]:.4f}")
    return trained, trace


def predict(
    params: ModelParams,
    config: ModelConfig,
    windows: np.ndarray,
    batch_size: int = PREDICT_BATCH_SIZE,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """
    Eval-mode scores for a window stack.

    Returns:
        (scores, hard_labels); classify labels are score >= threshold,
        regress returns None for labels
    """
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim == 2:
        windows = windows[None]
    scores = np.empty(windows.shape[0])
    for start in range(0, windows.shape[0], batch_size):
        batch = windows[start:start + batch_size]
        output, _ = forward(params, config, batch, training=False)
        scores[start:start + batch_size] = output
    if config.task != "classify":
        return scores, None
    return scores, (scores >= config.threshold).astype(np.int64)

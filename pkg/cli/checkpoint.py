"""
Text checkpoints.

    mamnet-checkpoint v1
    [meta]        config_hash
    [config]      the effective RunConfig, flat key = value
    [model]       the ModelConfig the tensors were built for
    [features]    selected column indices and names, regress target index
    [norm]        NormStats fitted on the training rows
    [tensor NAME] shape, then row-major data with 17 significant digits

Decimal floats with 17 significant digits round-trip float64 exactly, so a
loaded checkpoint predicts bitwise-identically to the saved one.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from cli.config import RunConfig, config_from_bindings, config_hash, render_config
from datapipe import NormStats
from errors import DataError, MamNetError
from fusion import ModelConfig, ModelParams, PARAM_NAMES

HEADER = "mamnet-checkpoint v1"
MODEL_INTS = ("window", "features", "state_dim", "fusion_dim", "spectral_bins")
MODEL_FLOATS = ("dropout", "threshold")


@dataclass
class Checkpoint:
    run_config: RunConfig
    model_config: ModelConfig
    params: ModelParams
    norm: NormStats
    selected: List[int]
    columns: List[str]
    target_index: int = 0


def _numbers(values) -> str:
    return " ".join("%.17g" % v for v in np.asarray(values, dtype=np.float64).reshape(-1))


def render_checkpoint(checkpoint: Checkpoint) -> str:
    lines = [HEADER, "[meta]", f"config_hash = {config_hash(checkpoint.run_config)}", "[config]"]
    lines += render_config(checkpoint.run_config).splitlines()
    lines.append("[model]")
    lines += [f"{key} = {value}" for key, value in checkpoint.model_config.to_dict().items()]
    lines += [
        "[features]",
        "selected = " + ",".join(str(i) for i in checkpoint.selected),
        "columns = " + ",".join(checkpoint.columns),
        f"target_index = {checkpoint.target_index}",
        "[norm]",
        "minimum = " + _numbers(checkpoint.norm.minimum),
        "maximum = " + _numbers(checkpoint.norm.maximum),
        f"fitted_rows = {checkpoint.norm.fitted_rows}",
    ]
    for name, array in checkpoint.params.named_tensors().items():
        lines += [f"[tensor {name}]", "shape = " + ",".join(str(d) for d in array.shape), "data = " + _numbers(array)]
    return "\n".join(lines) + "\n"


def save_checkpoint(path, checkpoint: Checkpoint) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_checkpoint(checkpoint), encoding="utf-8")
    return path


def _sections(text: str, path) -> Dict[str, List[Tuple[str, str, int]]]:
    lines = text.split("\n")
    if not lines or lines[0].strip() != HEADER:
        raise DataError(f"{path}: expected header '{HEADER}', got '{lines[0].strip() if lines else ''}'", stage="checkpoint")
    sections: Dict[str, List[Tuple[str, str, int]]] = {}
    current = None
    for number, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            sections[current] = []
            continue
        key, sep, value = line.partition("=")
        if current is None or not sep:
            raise DataError(f"{path}: malformed line {number}", stage="checkpoint")
        sections[current].append((key.strip(), value.strip(), number))
    return sections


def _field(section: List[Tuple[str, str, int]], key: str, where: str) -> str:
    for name, value, _ in section:
        if name == key:
            return value
    raise DataError(f"{where}: missing '{key}'", stage="checkpoint")


def _floats(text: str, where: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split()], dtype=np.float64)
    except ValueError:
        raise DataError(f"{where}: unparseable number", stage="checkpoint")


def _ints(values: List[str], where: str) -> List[int]:
    try:
        return [int(v) for v in values if v.strip()]
    except ValueError:
        raise DataError(f"{where}: unparseable integer", stage="checkpoint")


def _tensor(section: List[Tuple[str, str, int]], name: str) -> np.ndarray:
    where = f"tensor {name}"
    shape_text = _field(section, "shape", where)
    try:
        shape = tuple(int(d) for d in shape_text.split(",") if d.strip())
    except ValueError:
        raise DataError(f"{where}: bad shape '{shape_text}'", stage="checkpoint")
    data = _floats(_field(section, "data", where), where)
    expected = int(np.prod(shape)) if shape else 1
    if data.size != expected:
        raise DataError(f"{where}: truncated, {data.size} of {expected} values", stage="checkpoint")
    return data.reshape(shape)


def load_checkpoint(path) -> Checkpoint:
    """
    Raises:
        DataError: Wrong header or version, missing sections, or a truncated tensor (named)
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"checkpoint not found: {path}", stage="checkpoint")
    sections = _sections(path.read_text(encoding="utf-8"), path)
    for required in ("config", "model", "features", "norm"):
        if required not in sections:
            raise DataError(f"{path}: missing [{required}] section", stage="checkpoint")

    try:
        run_config = config_from_bindings(sections["config"])
        model_values = {key: value for key, value, _ in sections["model"]}
        for key in MODEL_INTS:
            model_values[key] = int(model_values[key])
        for key in MODEL_FLOATS:
            model_values[key] = float(model_values[key])
        model_config = ModelConfig(**model_values)
    except (MamNetError, KeyError, ValueError, TypeError) as e:
        raise DataError(f"{path}: bad config block: {e}", stage="checkpoint") from e

    features = sections["features"]
    selected = _ints(_field(features, "selected", "features").split(","), "features.selected")
    columns = [c for c in _field(features, "columns", "features").split(",") if c]
    (target_index,) = _ints([_field(features, "target_index", "features")], "features.target_index")

    norm_section = sections["norm"]
    (fitted_rows,) = _ints([_field(norm_section, "fitted_rows", "norm")], "norm.fitted_rows")
    norm = NormStats(
        minimum=_floats(_field(norm_section, "minimum", "norm"), "norm.minimum"),
        maximum=_floats(_field(norm_section, "maximum", "norm"), "norm.maximum"),
        fitted_rows=fitted_rows,
    )
    for name, vector in (("minimum", norm.minimum), ("maximum", norm.maximum)):
        if vector.size != model_config.features:
            raise DataError(
                f"{path}: norm.{name} has {vector.size} values for {model_config.features} features",
                stage="checkpoint",
            )

    tensors = {}
    for name in PARAM_NAMES:
        section = sections.get(f"tensor {name}")
        if section is None:
            raise DataError(f"{path}: missing tensor {name}", stage="checkpoint")
        tensors[name] = _tensor(section, name)
    params = ModelParams.from_tensors(model_config, tensors)

    return Checkpoint(
        run_config=run_config,
        model_config=model_config,
        params=params,
        norm=norm,
        selected=selected,
        columns=columns,
        target_index=target_index,
    )

"""
Flat `key = value` run configuration and synthetic-spec files.

Both are read with python-dotenv's stream parser so every binding keeps its
source line; values are then converted against the documented key table.
"""

import hashlib
import io
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Tuple, get_type_hints

from dotenv.parser import parse_stream

from datapipe import DEFAULT_LABEL_COLUMN, EventSpec, Sinusoid, SynthSpec
from errors import ConfigurationError, UsageError
from evaluation import ExperimentSettings
from fusion import VARIANTS
from numerics import DEFAULT_SEED

DEFAULT_SEEDS = [1, 2, 3, 4, 5]
DEFAULT_OUTPUT_DIR = "runs"
TRUE_WORDS = ("true", "1", "yes", "on")
FALSE_WORDS = ("false", "0", "no", "off")


@dataclass(frozen=True)
class RunConfig:
    """Every documented config key. Unknown keys are rejected by parse_config."""

    window_w: int = 32
    hop: int = 1
    state_dim: int = 16
    fusion_dim: int = 16
    spectral_bins: int = 0
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
    label_column: str = DEFAULT_LABEL_COLUMN
    target_feature: str = ""
    correlation_threshold: float = 0.05
    rfe_keep: int = 0
    smote_k: int = 5
    balance: bool = True
    balance_ratio: float = 1.0
    data_path: str = ""
    synth_spec_path: str = ""
    seeds: List[int] = field(default_factory=lambda: list(DEFAULT_SEEDS))
    seed: int = DEFAULT_SEED
    variants: List[str] = field(default_factory=lambda: list(VARIANTS))
    output_dir: str = DEFAULT_OUTPUT_DIR

    def experiment(self) -> ExperimentSettings:
        keys = set(ExperimentSettings.keys())
        return ExperimentSettings(**{k: v for k, v in self.to_dict().items() if k in keys})

    def to_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def with_values(self, **values: Any) -> "RunConfig":
        return replace(self, **values)

    def validate(self) -> "RunConfig":
        """
        Raises:
            ConfigurationError: On any out-of-range value
        """
        self.experiment().model_config(features=1)
        checks = [
            (self.hop >= 1, "hop must be >= 1"),
            (self.batch_size >= 1, "batch_size must be >= 1"),
            (self.epochs >= 0, "epochs must be >= 0"),
            (0.0 < self.split_fraction < 1.0, "split_fraction must be in (0, 1)"),
            (0.0 < self.validation_fraction < 1.0, "validation_fraction must be in (0, 1)"),
            (self.label_rule in ("any", "fraction"), "label_rule must be 'any' or 'fraction'"),
            (0.0 < self.label_fraction <= 1.0, "label_fraction must be in (0, 1]"),
            (self.lr > 0, "lr must be > 0"),
            (self.rfe_keep >= 0, "rfe_keep must be >= 0"),
            (self.smote_k >= 1, "smote_k must be >= 1"),
            (self.balance_ratio > 0, "balance_ratio must be > 0"),
            (self.correlation_threshold >= 0, "correlation_threshold must be >= 0"),
            (len(self.seeds) >= 1, "seeds must list at least one seed"),
            (all(v in VARIANTS for v in self.variants), f"variants must be drawn from {VARIANTS}"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigurationError(message, stage="config")
        return self


def read_bindings(path) -> List[Tuple[str, str, int]]:
    """
    (key, value, line) for every assignment in a flat config file.

    Raises:
        UsageError: Missing file, or a line that is not `key = value`
    """
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}", stage="config")
    text = path.read_text(encoding="utf-8")
    bindings = []
    seen = set()
    for binding in parse_stream(io.StringIO(text)):
        raw = binding.original.string
        # original.line points at leading blank lines, not at the binding itself
        line = binding.original.line + raw[: len(raw) - len(raw.lstrip())].count("\n")
        if binding.error or (binding.key is not None and binding.value is None):
            raise UsageError(f"line {line}: expected 'key = value', got '{raw.strip()}'", stage="config")
        if binding.key is None:
            continue
        if binding.key in seen:
            raise UsageError(f"line {line}: key '{binding.key}' set twice", stage="config")
        seen.add(binding.key)
        bindings.append((binding.key, binding.value.strip(), line))
    return bindings


def convert_value(kind, text: str):
    if kind is bool:
        word = text.lower()
        if word in TRUE_WORDS:
            return True
        if word in FALSE_WORDS:
            return False
        raise ValueError(text)
    if kind == List[int]:
        return [int(part) for part in text.split(",") if part.strip()]
    if kind == List[str]:
        return [part.strip() for part in text.split(",") if part.strip()]
    return kind(text)


def parse_config(path) -> RunConfig:
    """
    Read a RunConfig file. Absent keys take their defaults; an empty file is
    the all-defaults config.

    Raises:
        UsageError: Unknown key or unparseable value, naming key and line
        ConfigurationError: Values that parse but are out of range
    """
    return config_from_bindings(read_bindings(path))


def config_from_bindings(bindings: List[Tuple[str, str, int]]) -> RunConfig:
    """Convert (key, text, line) triples into a validated RunConfig."""
    types = get_type_hints(RunConfig)
    values: Dict[str, Any] = {}
    for key, text, line in bindings:
        if key not in types:
            raise UsageError(f"line {line}: unknown key '{key}'", stage="config")
        try:
            values[key] = convert_value(types[key], text)
        except ValueError:
            raise UsageError(f"line {line}: cannot parse {key} = '{text}'", stage="config")
    return RunConfig(**values).validate()


def _render_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(_render_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(config: RunConfig) -> str:
    """Canonical flat rendering, one `key = value` per field in declaration order."""
    return "".join(f"{key} = {_render_value(value)}\n" for key, value in config.to_dict().items())


def config_hash(config: RunConfig) -> str:
    """First 12 hex digits of the SHA-256 of the canonical rendering."""
    return hashlib.sha256(render_config(config).encode("utf-8")).hexdigest()[:12]


# ---------------------------------------------------------------------------
# Synthetic-data spec files
#   sinusoids = amplitude:period:phase[:feature];...
#   events    = kind:rate:magnitude:duration[:period];...
# ---------------------------------------------------------------------------

def _parse_sinusoids(text: str) -> Tuple[Sinusoid, ...]:
    items = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        fields_ = part.split(":")
        if len(fields_) not in (3, 4):
            raise ValueError(part)
        feature = int(fields_[3]) if len(fields_) == 4 else None
        items.append(Sinusoid(float(fields_[0]), float(fields_[1]), float(fields_[2]), feature))
    return tuple(items)


def _parse_events(text: str) -> Tuple[EventSpec, ...]:
    items = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        fields_ = part.split(":")
        if len(fields_) not in (4, 5):
            raise ValueError(part)
        period = float(fields_[4]) if len(fields_) == 5 else 4.0
        items.append(EventSpec(fields_[0].strip(), float(fields_[1]), float(fields_[2]), int(fields_[3]), period))
    return tuple(items)


_SYNTH_PARSERS = {
    "length": int,
    "features": int,
    "baselines": lambda t: tuple(float(v) for v in t.split(",") if v.strip()),
    "sinusoids": _parse_sinusoids,
    "ar_phi": float,
    "ar_sigma": float,
    "events": _parse_events,
    "seed": int,
}


def parse_synth_spec(path) -> SynthSpec:
    """
    Raises:
        UsageError: Unknown key, unparseable value, or missing length/features
    """
    values: Dict[str, Any] = {}
    for key, text, line in read_bindings(path):
        if key not in _SYNTH_PARSERS:
            raise UsageError(f"line {line}: unknown synth key '{key}'", stage="synth_spec")
        try:
            values[key] = _SYNTH_PARSERS[key](text)
        except ValueError:
            raise UsageError(f"line {line}: cannot parse {key} = '{text}'", stage="synth_spec")
    missing = [k for k in ("length", "features") if k not in values]
    if missing:
        raise UsageError(f"synth spec missing {missing}", stage="synth_spec")
    spec = SynthSpec(**values)
    spec.validate()
    return spec


def render_synth_spec(spec: SynthSpec) -> str:
    sinusoids = ";".join(
        f"{s.amplitude!r}:{s.period!r}:{s.phase!r}" + ("" if s.feature is None else f":{s.feature}")
        for s in spec.sinusoids
    )
    events = ";".join(f"{e.kind}:{e.rate!r}:{e.magnitude!r}:{e.duration}:{e.period!r}" for e in spec.events)
    lines = {
        "length": spec.length,
        "features": spec.features,
        "baselines": ",".join(repr(float(b)) for b in spec.baselines),
        "sinusoids": sinusoids,
        "ar_phi": repr(float(spec.ar_phi)),
        "ar_sigma": repr(float(spec.ar_sigma)),
        "events": events,
        "seed": spec.seed,
    }
    return "".join(f"{key} = {value}\n" for key, value in lines.items())

"""
CLI module: run configuration, checkpoints and command dispatch (cli.main).
"""

from .config import RunConfig, parse_config, render_config, config_hash, parse_synth_spec, render_synth_spec
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint, HEADER

__all__ = [
    "RunConfig",
    "parse_config",
    "render_config",
    "config_hash",
    "parse_synth_spec",
    "render_synth_spec",
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "HEADER",
]

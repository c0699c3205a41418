"""
Data pipeline: flow-table ingestion, normalization, feature selection,
class balancing, windowing and synthetic traffic generation.
"""

from .flows import FlowTable, load_flows, write_flows, DEFAULT_LABEL_COLUMN, DEFAULT_TAG_COLUMN, NORMAL_TAG
from .normalize import NormStats, minmax_fit, minmax_apply
from .select import correlation_filter, rfe, label_correlations
from .balance import smote_oversample, undersample, balance_windows
from .windows import WindowSet, make_windows, window_count, LABEL_RULES
from .synth import SynthSpec, Sinusoid, EventSpec, synth_generate, reference_spec, EVENT_KINDS

__all__ = [
    "FlowTable",
    "load_flows",
    "write_flows",
    "DEFAULT_LABEL_COLUMN",
    "DEFAULT_TAG_COLUMN",
    "NORMAL_TAG",
    "NormStats",
    "minmax_fit",
    "minmax_apply",
    "correlation_filter",
    "rfe",
    "label_correlations",
    "smote_oversample",
    "undersample",
    "balance_windows",
    "WindowSet",
    "make_windows",
    "window_count",
    "LABEL_RULES",
    "SynthSpec",
    "Sinusoid",
    "EventSpec",
    "synth_generate",
    "reference_spec",
    "EVENT_KINDS",
]

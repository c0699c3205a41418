"""
Multi-seed ablation harness.

Every (variant, seed) run goes through the whole pipeline. Data is prepared
once per seed and shared by the variants of that seed, so variants differ
only in the network. Results are sorted by (variant, seed) before
aggregation, which makes the report independent of seed order.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from tqdm import tqdm

from datapipe import FlowTable
from errors import ConfigurationError, NumericFailure
from evaluation.experiment import ExperimentSettings, RunResult, prepare_data, run_experiment
from evaluation.metrics import CLASSIFY_METRICS, REGRESS_METRICS, Confusion
from evaluation.stats import confidence_interval, welch_t_test
from fusion import VARIANTS

logger = logging.getLogger(__name__)

REFERENCE_VARIANT = "full"


@dataclass
class ReportRow:
    variant: str
    metric: str
    mean: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]
    p_vs_full: Optional[float]
    values: List[float]
    seeds: List[int]


@dataclass
class EvalReport:
    rows: List[ReportRow]
    seeds: List[int]
    config_hash: str = ""
    provenance: str = ""
    failed: Dict[str, str] = field(default_factory=dict)
    groups: Dict[str, Dict[str, Confusion]] = field(default_factory=dict)  # variant -> tag -> summed confusion

    def row(self, variant: str, metric: str) -> ReportRow:
        for row in self.rows:
            if row.variant == variant and row.metric == metric:
                return row
        raise KeyError((variant, metric))

    @property
    def variants(self) -> List[str]:
        return list(dict.fromkeys(row.variant for row in self.rows))


def aggregate(
    results: List[RunResult],
    metrics: Sequence[str],
    variants: Sequence[str],
    seeds: List[int],
) -> List[ReportRow]:
    """Per variant x metric mean, 95% CI and Welch p against the full model."""
    ordered = sorted(results, key=lambda r: (r.variant, r.seed))
    samples: Dict[str, Dict[str, List[float]]] = {}
    run_seeds: Dict[str, Dict[str, List[int]]] = {}
    for result in ordered:
        for metric in metrics:
            value = result.metrics.get(metric)
            if value is not None:
                samples.setdefault(result.variant, {}).setdefault(metric, []).append(value)
                run_seeds.setdefault(result.variant, {}).setdefault(metric, []).append(result.seed)

    rows = []
    for variant in variants:
        if variant not in {r.variant for r in ordered}:
            continue
        for metric in metrics:
            values = samples.get(variant, {}).get(metric, [])
            mean = low = high = p = None
            if len(values) >= 2:
                mean, low, high = confidence_interval(values)
            elif values:
                mean = values[0]
            reference = samples.get(REFERENCE_VARIANT, {}).get(metric, [])
            if variant != REFERENCE_VARIANT and len(values) >= 2 and len(reference) >= 2:
                p = welch_t_test(values, reference).p
            rows.append(ReportRow(variant, metric, mean, low, high, p, values, run_seeds.get(variant, {}).get(metric, [])))
    return rows


def _sum_groups(results: List[RunResult]) -> Dict[str, Dict[str, Confusion]]:
    totals: Dict[str, Dict[str, Confusion]] = {}
    for result in sorted(results, key=lambda r: (r.variant, r.seed)):
        for tag, group in result.groups.items():
            per_variant = totals.setdefault(result.variant, {})
            c = group["confusion"]
            per_variant[tag] = per_variant[tag] + c if tag in per_variant else c
    return totals


def run_ablation(
    table: FlowTable,
    settings: ExperimentSettings,
    seeds: Sequence[int],
    variants: Sequence[str] = VARIANTS,
    config_hash: str = "",
    progress: bool = False,
) -> EvalReport:
    """
    Train and score every variant under every seed and aggregate.

    A NumericFailure marks its variant failed; other variants are unaffected.

    Raises:
        ConfigurationError: Fewer than 2 distinct seeds, or an unknown variant
    """
    seeds = sorted(set(int(s) for s in seeds))
    if len(seeds) < 2:
        raise ConfigurationError("ablation needs at least 2 distinct seeds for confidence intervals", stage="ablation")
    unknown = [v for v in variants if v not in VARIANTS]
    if unknown:
        raise ConfigurationError(f"unknown variants {unknown}", stage="ablation")
    variants = list(dict.fromkeys(variants))

    results: List[RunResult] = []
    failed: Dict[str, str] = {}
    with tqdm(total=len(seeds) * len(variants), desc="Ablation", disable=not progress) as bar:
        for seed in seeds:
            prepared = prepare_data(table, settings, seed)
            for variant in variants:
                if variant not in failed:
                    try:
                        results.append(run_experiment(table, settings, seed, variant, prepared=prepared))
                    except NumericFailure as e:
                        logger.error(f"Variant {variant} failed at seed {seed}: {e}")
                        failed[variant] = str(e)
                bar.update(1)

    results = [r for r in results if r.variant not in failed]
    metrics = REGRESS_METRICS if settings.task == "regress" else CLASSIFY_METRICS
    report = EvalReport(
        rows=aggregate(results, metrics, variants, seeds),
        seeds=seeds,
        config_hash=config_hash,
        provenance=table.provenance,
        failed=failed,
        groups=_sum_groups(results),
    )
    logger.info(f"Ablation done: {len(results)} runs, {len(failed)} failed variants")
    return report

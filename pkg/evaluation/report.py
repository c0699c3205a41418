"""
Report emission: CSV plus JSON-lines records, and the percentage table
printed by the CLI ("96.32 (95.50-97.14)").

Metrics stay fractions until this layer. Undefined values are written "n/a".
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from evaluation.ablation import EvalReport
from evaluation.experiment import RunResult
from evaluation.metrics import REGRESS_METRICS
from evaluation.search import GridResult, SweepRow

UNDEFINED = "n/a"
REPORT_COLUMNS = ["variant", "metric", "mean", "ci_low", "ci_high", "p_vs_full", "config_hash", "seeds"]


def _cell(value: Optional[float]) -> Any:
    return UNDEFINED if value is None else value


def format_ci(mean: Optional[float], low: Optional[float], high: Optional[float], metric: str = "f1") -> str:
    """Percentages with two decimals for classification metrics, raw values with three for MAE/MSE."""
    if mean is None:
        return UNDEFINED
    if metric in REGRESS_METRICS:
        render = lambda v: f"{v:.3f}"
    else:
        render = lambda v: f"{100.0 * v:.2f}"
    if low is None or high is None:
        return render(mean)
    return f"{render(mean)} ({render(low)}-{render(high)})"


def _seed_text(seeds: List[int]) -> str:
    return ",".join(str(s) for s in seeds)


def report_frame(report: EvalReport) -> pd.DataFrame:
    records = [
        {
            "variant": row.variant,
            "metric": row.metric,
            "mean": _cell(row.mean),
            "ci_low": _cell(row.ci_low),
            "ci_high": _cell(row.ci_high),
            "p_vs_full": _cell(row.p_vs_full),
            "config_hash": report.config_hash,
            "seeds": _seed_text(report.seeds),
        }
        for row in report.rows
    ]
    for variant in report.failed:
        records.append({
            "variant": variant, "metric": "failed", "mean": UNDEFINED, "ci_low": UNDEFINED, "ci_high": UNDEFINED,
            "p_vs_full": UNDEFINED, "config_hash": report.config_hash, "seeds": _seed_text(report.seeds),
        })
    return pd.DataFrame(records, columns=REPORT_COLUMNS)


def _write_jsonl(records: List[Dict[str, Any]], path: Path) -> Path:
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True) + "\n")
    return path


def write_report(report: EvalReport, path) -> List[Path]:
    """
    Write the ablation report as `<path>` (CSV) and `<path>.jsonl`.

    Returns:
        Paths written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    report_frame(report).to_csv(path, index=False, float_format="%.17g")
    records = [
        {
            "variant": row.variant,
            "metric": row.metric,
            "mean": row.mean,
            "ci_low": row.ci_low,
            "ci_high": row.ci_high,
            "p_vs_full": row.p_vs_full,
            "values": row.values,
            "config_hash": report.config_hash,
            "seeds": report.seeds,
            "provenance": report.provenance,
        }
        for row in report.rows
    ]
    records += [
        {"variant": v, "failed": reason, "config_hash": report.config_hash, "seeds": report.seeds}
        for v, reason in report.failed.items()
    ]
    records += [
        {"variant": v, "group": tag, **c.to_dict(), "config_hash": report.config_hash}
        for v, groups in report.groups.items()
        for tag, c in groups.items()
    ]
    jsonl = _write_jsonl(records, path.with_name(path.name + ".jsonl"))
    return [path, jsonl]


def format_table(report: EvalReport) -> str:
    """Variant rows by metric columns, each cell "mean (low-high)", plus p vs full on F1 or MSE."""
    metrics = list(dict.fromkeys(row.metric for row in report.rows))
    key_metric = "mse" if "mse" in metrics else "f1"
    header = ["variant"] + metrics + [f"p({key_metric})"]
    lines = []
    for variant in report.variants:
        cells = [variant]
        for metric in metrics:
            row = report.row(variant, metric)
            cells.append(format_ci(row.mean, row.ci_low, row.ci_high, metric))
        p = report.row(variant, key_metric).p_vs_full if key_metric in metrics else None
        cells.append(UNDEFINED if p is None else f"{p:.4f}")
        lines.append(cells)
    for variant in report.failed:
        lines.append([variant] + ["failed"] * len(metrics) + [UNDEFINED])
    widths = [max(len(str(r[i])) for r in [header] + lines) for i in range(len(header))]
    render = lambda cells: "  ".join(str(c).ljust(w) for c, w in zip(cells, widths))
    return "\n".join([render(header)] + [render(cells) for cells in lines])


def write_run_metrics(result: RunResult, path, config_hash: str) -> List[Path]:
    """Single-run metrics (eval subcommand) plus per-group rows, as CSV and JSON lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = [
        {"group": "all", "metric": name, "value": _cell(value), "config_hash": config_hash, "seeds": str(result.seed)}
        for name, value in result.metrics.items()
    ]
    for tag, group in result.groups.items():
        for name in ("accuracy", "precision", "recall", "f1"):
            records.append({
                "group": tag, "metric": name, "value": _cell(group[name]),
                "config_hash": config_hash, "seeds": str(result.seed),
            })
    pd.DataFrame(records, columns=["group", "metric", "value", "config_hash", "seeds"]).to_csv(
        path, index=False, float_format="%.17g"
    )
    structured = [
        {"group": "all", **({"confusion": result.confusion.to_dict()} if result.confusion else {}),
         "metrics": result.metrics, "config_hash": config_hash, "seed": result.seed}
    ]
    structured += [
        {"group": tag, "confusion": group["confusion"].to_dict(),
         "metrics": {k: v for k, v in group.items() if k != "confusion"}, "config_hash": config_hash, "seed": result.seed}
        for tag, group in result.groups.items()
    ]
    return [path, _write_jsonl(structured, path.with_name(path.name + ".jsonl"))]


def write_grid(result: GridResult, path, config_hash: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = [{**row, result.metric: _cell(row[result.metric]), "config_hash": config_hash} for row in result.scores]
    frame = pd.DataFrame(records)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def write_sweep(rows: List[SweepRow], path, config_hash: str, seeds: List[int]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [
            {"key": r.key, "value": r.value, "metric": r.metric, "mean": _cell(r.mean),
             "ci_low": _cell(r.ci_low), "ci_high": _cell(r.ci_high),
             "config_hash": config_hash, "seeds": _seed_text(seeds)}
            for r in rows
        ],
        columns=["key", "value", "metric", "mean", "ci_low", "ci_high", "config_hash", "seeds"],
    )
    frame.to_csv(path, index=False, float_format="%.17g")
    return path

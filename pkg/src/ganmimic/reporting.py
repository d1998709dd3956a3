"""Render experiment results into tables and plots.

A results store is a directory holding `metrics.jsonl` (serialized metric
rows) and/or `sweep.jsonl` (budget-sweep cells). Emission is deterministic:
rerunning over the same store produces byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

from .metrics import METRIC_COLUMNS, MetricReport
from .reference import EXPERIMENT_LABELS, FULL_SCALE_RESULTS
from .sweep import load_sweep_store, summarize_sweep

METRICS_FILENAME = "metrics.jsonl"
SWEEP_FILENAME = "sweep.jsonl"

_TASK_ORDER = {"monet": 0, "anime": 1, "superres": 2}
_COMPARISON_ORDER = {label: i for i, label in enumerate(EXPERIMENT_LABELS.values())}
_METRIC_ORDER = {"fid": 0, "ssim": 1, "psnr": 2}


def append_metric_report(store_dir, report: MetricReport) -> Path:
    store_dir = Path(store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    path = store_dir / METRICS_FILENAME
    with open(path, "a") as fh:
        fh.write(json.dumps(asdict(report)) + "\n")
    return path


def load_metric_reports(store_dir) -> list[MetricReport]:
    path = Path(store_dir) / METRICS_FILENAME
    if not path.exists():
        return []
    reports = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                reports.append(MetricReport(**json.loads(line)))
    return reports


def _table_sort_key(report: MetricReport):
    """Fixed presentation order: style tasks before super-resolution, victim
    baseline rows before surrogate rows, FID before SSIM before PSNR."""
    return (
        _TASK_ORDER.get(report.task, len(_TASK_ORDER)),
        report.task,
        _COMPARISON_ORDER.get(report.comparison, len(_COMPARISON_ORDER)),
        report.comparison,
        _METRIC_ORDER.get(report.metric, len(_METRIC_ORDER)),
        report.metric,
        report.test_set,
    )


def _write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def write_metric_table(reports, path) -> Path:
    rows = [
        (r.task, r.test_set, r.comparison, r.metric, _fmt(r.mean), _fmt(r.std), r.n_runs)
        for r in sorted(reports, key=_table_sort_key)
    ]
    return _write_csv(Path(path), METRIC_COLUMNS, rows)


def write_reference_table(path) -> Path:
    """The published full-scale numbers in the same column layout, emitted
    next to local tables for context."""
    reports = [
        MetricReport(
            task=r.task,
            test_set=r.test_set,
            comparison=EXPERIMENT_LABELS[r.experiment],
            metric=r.metric,
            mean=r.mean,
            std=r.std,
            n_runs=5,
        )
        for r in FULL_SCALE_RESULTS
    ]
    return write_metric_table(reports, path)


def _augs_label(augmentations) -> str:
    return "+".join(augmentations) if augmentations else "none"


def write_budget_curve(cells, path) -> Path:
    """CSV with one row per (fraction, augmentation setting): the mean, std,
    and median proxy metric over that cell's repetitions."""
    rows_src = summarize_sweep(cells)
    if not rows_src:
        raise ValueError("no successful sweep cells to report")
    rows = [
        (
            f"{r['fraction']:g}",
            _augs_label(r["augmentations"]),
            r["n"],
            _fmt(r["mean"]),
            _fmt(r["std"]),
            _fmt(r["median"]),
        )
        for r in rows_src
    ]
    header = ("fraction", "augmentations", "n_runs", "mean", "std", "median")
    return _write_csv(Path(path), header, rows)


def render_budget_curve(cells, path):
    """Best-effort PNG of the budget curve; returns None when plotting is
    unavailable."""
    try:
        import matplotlib

        matplotlib.use("Agg", force=True)
        import matplotlib.pyplot as plt
    except Exception:
        return None
    rows = summarize_sweep(cells)
    if not rows:
        raise ValueError("no successful sweep cells to plot")
    groups: dict = {}
    for r in rows:
        groups.setdefault(tuple(r["augmentations"]), []).append(r)
    fig, ax = plt.subplots(figsize=(5.0, 3.5), dpi=120)
    for augs, pts in sorted(groups.items()):
        pts = sorted(pts, key=lambda r: r["fraction"])
        ax.errorbar(
            [p["fraction"] for p in pts],
            [p["mean"] for p in pts],
            yerr=[p["std"] for p in pts],
            marker="o",
            capsize=3,
            label=_augs_label(augs),
        )
    ax.set_xlabel("query budget fraction")
    ax.set_ylabel("proxy SSIM (surrogate vs victim)")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, metadata={"Software": "ganmimic"})
    plt.close(fig)
    return path


def emit_report(store_dir, out_dir) -> dict[str, Path]:
    """Render every table and plot the store supports.

    Returns a name -> path mapping of the written artifacts. Raises if the
    store holds no results at all.
    """
    store_dir = Path(store_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = load_metric_reports(store_dir)
    cells = load_sweep_store(store_dir / SWEEP_FILENAME)
    if not reports and not cells:
        raise ValueError(f"no results found under {store_dir}")
    artifacts = {}
    if reports:
        artifacts["table"] = write_metric_table(reports, out_dir / "table.csv")
    artifacts["full_scale_reference"] = write_reference_table(
        out_dir / "full_scale_reference.csv"
    )
    if cells:
        artifacts["budget_curve"] = write_budget_curve(cells, out_dir / "budget_curve.csv")
        png = render_budget_curve(cells, out_dir / "budget_curve.png")
        if png is not None:
            artifacts["budget_curve_png"] = png
    return artifacts

"""Structured metric records.

A MetricReport is one table row: which task, which test set, which pair of
image sets was compared, which metric, and the score statistics over repeated
runs. Column order for serialized tables is fixed as
(task, test_set, comparison, metric, mean, std, n_runs).
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

METRIC_COLUMNS = ("task", "test_set", "comparison", "metric", "mean", "std", "n_runs")


@dataclass(frozen=True)
class MetricReport:
    task: str
    test_set: str
    comparison: str
    metric: str
    mean: float
    std: float
    n_runs: int

    def row(self) -> tuple:
        return tuple(getattr(self, c) for c in METRIC_COLUMNS)


def summarize_scores(scores, *, task, test_set, comparison, metric) -> MetricReport:
    """Aggregate per-run scores into a single report row.

    `std` is the sample standard deviation, 0.0 for a single run.
    """
    values = [float(s) for s in scores]
    if not values:
        raise ValueError("no scores to summarize")
    if any(not math.isfinite(v) for v in values):
        raise ValueError("scores must be finite")
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return MetricReport(
        task=task,
        test_set=test_set,
        comparison=comparison,
        metric=metric,
        mean=mean,
        std=std,
        n_runs=len(values),
    )

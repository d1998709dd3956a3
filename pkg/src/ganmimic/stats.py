"""Statistical analysis of human evaluation scores.

Implements the unequal-variance (Welch) two-sample t-test, Cohen's d with the
pooled standard deviation, and the two one-sided tests (TOST) equivalence
procedure with bounds given on the standardized scale. Score files are
delimited text with header columns (task, model, participant_id, item_id,
score); scores are Likert integers in [1, 5].
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats as sps

__all__ = [
    "LikertSample",
    "TTestResult",
    "TostResult",
    "welch_t",
    "cohens_d",
    "tost",
    "ingest_scores",
]

DEFAULT_ALPHA = 0.05

MODEL_TAGS = ("victim", "surrogate")


class ScoreFileError(ValueError):
    """Malformed score file: bad header, tags, or out-of-range scores."""


@dataclass(frozen=True)
class LikertSample:
    """Scores on the 1..5 Likert scale for one (task, model) group."""

    scores: tuple[int, ...]
    model_tag: str = ""
    task_tag: str = ""

    def __post_init__(self):
        scores = tuple(int(s) for s in self.scores)
        for s in scores:
            if not 1 <= s <= 5:
                raise ValueError(f"Likert score out of range [1, 5]: {s}")
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    degrees_of_freedom: float
    p_value: float
    mean_a: float
    std_a: float
    n_a: int
    mean_b: float
    std_b: float
    n_b: int
    alpha: float
    significant: bool


@dataclass(frozen=True)
class TostResult:
    d_bound: float
    raw_bound: float
    p_lower: float
    p_upper: float
    p_tost: float
    alpha: float
    reject_nonequivalence: bool
    degrees_of_freedom: float


def _as_array(sample) -> np.ndarray:
    if isinstance(sample, LikertSample):
        return np.asarray(sample.scores, dtype=np.float64)
    return np.asarray(sample, dtype=np.float64)


def _describe(x: np.ndarray) -> tuple[float, float, int]:
    n = x.size
    if n < 2:
        raise ValueError(f"need at least 2 observations per sample, got {n}")
    return float(x.mean()), float(x.std(ddof=1)), n


def _welch_parts(a: np.ndarray, b: np.ndarray):
    mean_a, std_a, n_a = _describe(a)
    mean_b, std_b, n_b = _describe(b)
    va = std_a**2 / n_a
    vb = std_b**2 / n_b
    se = math.sqrt(va + vb)
    if se == 0.0:
        df = float(n_a + n_b - 2)
    else:
        df = (va + vb) ** 2 / (va**2 / (n_a - 1) + vb**2 / (n_b - 1))
    return (mean_a, std_a, n_a), (mean_b, std_b, n_b), se, df


def welch_t(a, b, alpha: float = DEFAULT_ALPHA) -> TTestResult:
    """Two-sided unequal-variance t-test with Welch-Satterthwaite df.

    Degenerate zero-variance inputs with equal means give t = 0 and p = 1 by
    convention; zero variance with unequal means gives p = 0.
    """
    xa, xb = _as_array(a), _as_array(b)
    (mean_a, std_a, n_a), (mean_b, std_b, n_b), se, df = _welch_parts(xa, xb)
    diff = mean_a - mean_b
    if se == 0.0:
        if diff == 0.0:
            t_stat, p = 0.0, 1.0
        else:
            t_stat, p = math.copysign(math.inf, diff), 0.0
    else:
        t_stat = diff / se
        p = min(1.0, 2.0 * float(sps.t.sf(abs(t_stat), df)))
    return TTestResult(
        t_statistic=t_stat,
        degrees_of_freedom=df,
        p_value=p,
        mean_a=mean_a,
        std_a=std_a,
        n_a=n_a,
        mean_b=mean_b,
        std_b=std_b,
        n_b=n_b,
        alpha=alpha,
        significant=p < alpha,
    )


def pooled_sd(a, b) -> float:
    """sqrt(((n_a - 1) s_a^2 + (n_b - 1) s_b^2) / (n_a + n_b - 2))."""
    xa, xb = _as_array(a), _as_array(b)
    mean_a, std_a, n_a = _describe(xa)
    mean_b, std_b, n_b = _describe(xb)
    return math.sqrt(
        ((n_a - 1) * std_a**2 + (n_b - 1) * std_b**2) / (n_a + n_b - 2)
    )


def cohens_d(a, b) -> float:
    """Standardized mean difference; NaN when the pooled sd is zero."""
    xa, xb = _as_array(a), _as_array(b)
    sd = pooled_sd(xa, xb)
    diff = float(xa.mean() - xb.mean())
    if sd == 0.0:
        return math.nan
    return diff / sd


def tost(a, b, d_bound: float, alpha: float = DEFAULT_ALPHA) -> TostResult:
    """Two one-sided Welch tests against +/- (d_bound * pooled sd).

    Non-equivalence is rejected when both one-sided tests reject, i.e. when
    max(p_lower, p_upper) < alpha.
    """
    if d_bound <= 0:
        raise ValueError(f"d_bound must be positive, got {d_bound}")
    xa, xb = _as_array(a), _as_array(b)
    raw_bound = d_bound * pooled_sd(xa, xb)
    (mean_a, _, _), (mean_b, _, _), se, df = _welch_parts(xa, xb)
    diff = mean_a - mean_b
    if se == 0.0:
        p_lower = 0.0 if diff > -raw_bound else 1.0
        p_upper = 0.0 if diff < raw_bound else 1.0
    else:
        t_lower = (diff + raw_bound) / se
        t_upper = (diff - raw_bound) / se
        p_lower = float(sps.t.sf(t_lower, df))
        p_upper = float(sps.t.cdf(t_upper, df))
    p_tost = max(p_lower, p_upper)
    return TostResult(
        d_bound=d_bound,
        raw_bound=raw_bound,
        p_lower=p_lower,
        p_upper=p_upper,
        p_tost=p_tost,
        alpha=alpha,
        reject_nonequivalence=p_tost < alpha,
        degrees_of_freedom=df,
    )


_SCORE_HEADER = ["task", "model", "participant_id", "item_id", "score"]


def ingest_scores(path: str | Path) -> list[LikertSample]:
    """Parse a score file into one LikertSample per (task, model) group.

    Groups are returned sorted by (task, model). An empty file yields an
    empty list.
    """
    path = Path(path)
    groups: dict[tuple[str, str], list[int]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return []
        missing = [c for c in _SCORE_HEADER if c not in reader.fieldnames]
        if missing:
            raise ScoreFileError(f"score file missing columns: {missing}")
        for lineno, row in enumerate(reader, start=2):
            model = row["model"].strip()
            if model not in MODEL_TAGS:
                raise ScoreFileError(f"line {lineno}: unknown model tag {model!r}")
            try:
                score = int(row["score"])
            except (TypeError, ValueError):
                raise ScoreFileError(f"line {lineno}: score is not an integer")
            if not 1 <= score <= 5:
                raise ScoreFileError(f"line {lineno}: score {score} outside [1, 5]")
            groups.setdefault((row["task"].strip(), model), []).append(score)
    return [
        LikertSample(scores=scores, task_tag=task, model_tag=model)
        for (task, model), scores in sorted(groups.items())
    ]

"""Budget sweeps: retrain the surrogate at dataset fractions across seeds.

Results accumulate in an append-only line-delimited store, so an interrupted
sweep resumes where it stopped and a failed cell never takes down its
neighbors.
"""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .config import ExperimentConfig
from .datasets import PairedDataset, subsample
from .extraction import augment_dataset, proxy_ssim, train_surrogate


@dataclass(frozen=True)
class SweepCell:
    """One (fraction, seed) training run and its metrics."""

    fraction: float
    seed: int
    arch: str
    augmentations: tuple[str, ...]
    n_pairs: int
    status: str  # "ok" | "error"
    proxy_ssim: float | None = None  # surrogate vs victim on held-out inputs
    truth_ssim: float | None = None  # surrogate vs ground-truth styling, if known
    error: str | None = None
    duration_s: float = 0.0

    def key(self):
        return (self.fraction, self.seed, self.arch, tuple(self.augmentations))


def _cell_from_dict(data: dict) -> SweepCell:
    data = dict(data)
    data["augmentations"] = tuple(data.get("augmentations", ()))
    return SweepCell(**data)


def load_sweep_store(path) -> list[SweepCell]:
    path = Path(path)
    if not path.exists():
        return []
    cells = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                cells.append(_cell_from_dict(json.loads(line)))
    return cells


def _append_cell(path, cell: SweepCell) -> None:
    if path is None:
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a") as fh:
        fh.write(json.dumps(asdict(cell)) + "\n")


def budget_sweep(
    pairs: PairedDataset,
    victim,
    cfg: ExperimentConfig,
    heldout_inputs,
    arch: str = "pix2pix",
    truth=None,
    store_path=None,
) -> list[SweepCell]:
    """Train one surrogate per (fraction, seed) cell and score each.

    Fractions and repetition count come from the config; cell r uses seed
    cfg.seed + r. Cells already present in the store are skipped, trainer
    errors are contained per cell, and every finished cell is appended to the
    store immediately.
    """
    heldout_inputs = list(heldout_inputs)
    if not heldout_inputs:
        raise ValueError("heldout_inputs must be non-empty")
    augs = tuple(sorted(cfg.augmentations))
    done = {c.key(): c for c in load_sweep_store(store_path)} if store_path else {}
    cells = []
    for fraction in cfg.fractions:
        for rep in range(cfg.repetitions):
            seed = cfg.seed + rep
            key = (fraction, seed, arch, augs)
            if key in done:
                cells.append(done[key])
                continue
            cells.append(
                _run_cell(
                    pairs, victim, cfg, heldout_inputs, arch, truth,
                    fraction, seed, augs, store_path,
                )
            )
    return cells


def _run_cell(
    pairs, victim, cfg, heldout_inputs, arch, truth, fraction, seed, augs, store_path
) -> SweepCell:
    start = time.monotonic()
    try:
        subset = subsample(pairs, fraction, seed)
        if augs:
            subset = augment_dataset(subset, augs, seed)
        run_cfg = cfg.with_overrides(seed=seed, budget_fraction=fraction)
        trained = train_surrogate(subset, arch, run_cfg)
        cell = SweepCell(
            fraction=fraction,
            seed=seed,
            arch=arch,
            augmentations=augs,
            n_pairs=len(subset),
            status="ok",
            proxy_ssim=proxy_ssim(trained.generator, victim, heldout_inputs),
            truth_ssim=(
                proxy_ssim(trained.generator, truth, heldout_inputs)
                if truth is not None
                else None
            ),
            duration_s=time.monotonic() - start,
        )
    except Exception as exc:
        cell = SweepCell(
            fraction=fraction,
            seed=seed,
            arch=arch,
            augmentations=augs,
            n_pairs=0,
            status="error",
            error=f"{type(exc).__name__}: {exc}",
            duration_s=time.monotonic() - start,
        )
    _append_cell(store_path, cell)
    return cell


def summarize_sweep(cells) -> list[dict]:
    """Mean/std/median of the proxy metric per (fraction, augmentations)."""
    groups: dict = {}
    for cell in cells:
        if cell.status != "ok":
            continue
        groups.setdefault((cell.fraction, tuple(cell.augmentations)), []).append(
            cell.proxy_ssim
        )
    rows = []
    for (fraction, augs), values in sorted(groups.items()):
        rows.append(
            {
                "fraction": fraction,
                "augmentations": list(augs),
                "n": len(values),
                "mean": statistics.fmean(values),
                "std": statistics.stdev(values) if len(values) > 1 else 0.0,
                "median": statistics.median(values),
            }
        )
    return rows


def median_curve(cells, augmentations=()) -> list[tuple[float, float]]:
    """(fraction, median proxy metric) points for one augmentation setting."""
    augs = tuple(sorted(augmentations))
    rows = [r for r in summarize_sweep(cells) if tuple(r["augmentations"]) == augs]
    return [(r["fraction"], r["median"]) for r in rows]


def is_nondecreasing(values, tol: float = 0.0) -> bool:
    return all(b >= a - tol for a, b in zip(values, values[1:]))

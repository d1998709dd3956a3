"""Dataset containers and directory I/O.

Two on-disk layouts are supported:

* unpaired: ``root/{trainA,trainB,testA,testB}/`` of PNG or JPEG files, the
  two sides carrying no correspondence;
* paired: ``root/{input,target}/`` with filename-matched PNG/JPEG files.

Ordering is lexicographic by filename in every directory, which fixes the
dataset order across processes and platforms. Datasets are immutable after
load and safe to share between workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .images import load_image, save_image

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


class DatasetError(ValueError):
    """Raised for missing directories or layout violations."""


@dataclass(frozen=True)
class UnpairedDataset:
    """Two uncorrelated image domains (unstyled side and style source side)."""

    domain_a: tuple[np.ndarray, ...]
    domain_b: tuple[np.ndarray, ...]
    split: str = "train"

    def __post_init__(self):
        object.__setattr__(self, "domain_a", tuple(self.domain_a))
        object.__setattr__(self, "domain_b", tuple(self.domain_b))


@dataclass(frozen=True)
class PairedDataset:
    """Aligned (input, target) image pairs."""

    pairs: tuple[tuple[np.ndarray, np.ndarray], ...]
    split: str = "train"

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def inputs(self) -> list[np.ndarray]:
        return [p[0] for p in self.pairs]

    @property
    def targets(self) -> list[np.ndarray]:
        return [p[1] for p in self.pairs]


def _list_images(directory: Path) -> list[Path]:
    if not directory.is_dir():
        return []
    files = [
        p
        for p in directory.iterdir()
        if p.is_file() and p.suffix.lower() in _IMAGE_SUFFIXES
    ]
    return sorted(files, key=lambda p: p.name)


def _load_dir(directory: Path) -> list[np.ndarray]:
    return [load_image(p) for p in _list_images(directory)]


def load_dataset(
    root: str | Path, layout: str, split: str = "train"
) -> UnpairedDataset | PairedDataset:
    """Load a dataset directory in the declared layout.

    Missing split subdirectories are treated as empty; a missing root is an
    error, as is a paired layout whose sides do not match filename-for-filename.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root does not exist: {root}")
    if layout == "unpaired":
        if split not in ("train", "test"):
            raise DatasetError(f"unknown split {split!r}")
        a_dir = root / f"{split}A"
        b_dir = root / f"{split}B"
        return UnpairedDataset(
            domain_a=_load_dir(a_dir), domain_b=_load_dir(b_dir), split=split
        )
    if layout == "paired":
        in_dir = root / "input"
        tgt_dir = root / "target"
        in_files = {p.name: p for p in _list_images(in_dir)}
        tgt_files = {p.name: p for p in _list_images(tgt_dir)}
        unmatched = set(in_files) ^ set(tgt_files)
        if unmatched:
            raise DatasetError(
                f"paired layout with unmatched filenames: {sorted(unmatched)[:5]}"
            )
        pairs = [
            (load_image(in_files[name]), load_image(tgt_files[name]))
            for name in sorted(in_files)
        ]
        return PairedDataset(pairs=pairs, split=split)
    raise DatasetError(f"unknown layout {layout!r}")


def pair_names(n: int) -> list[str]:
    """Zero-padded filenames used by the paired layout, in pair order."""
    width = max(4, len(str(max(n - 1, 0))))
    return [f"{i:0{width}d}.png" for i in range(n)]


def save_paired_dataset(ds: PairedDataset, root: str | Path) -> None:
    """Write pairs in the paired directory layout with zero-padded names."""
    root = Path(root)
    (root / "input").mkdir(parents=True, exist_ok=True)
    (root / "target").mkdir(parents=True, exist_ok=True)
    for name, (x, y) in zip(pair_names(len(ds.pairs)), ds.pairs):
        save_image(root / "input" / name, x)
        save_image(root / "target" / name, y)


def subsample(ds: PairedDataset, fraction: float, seed: int) -> PairedDataset:
    """Uniform without-replacement subsample of floor(fraction * N) pairs.

    Reproducible for a fixed (fraction, seed); the kept pairs preserve the
    original dataset order.
    """
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    n = len(ds.pairs)
    k = math.floor(fraction * n)
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.permutation(n)[:k])
    return PairedDataset(pairs=[ds.pairs[i] for i in keep], split=ds.split)

"""Deterministic seeding helpers shared by trainers, sweeps, and data synthesis."""

from __future__ import annotations

import hashlib

import numpy as np
import torch


def _label_entropy(label: str) -> int:
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def rng_for(seed: int, *labels: str) -> np.random.Generator:
    """Independent, platform-stable numpy stream for (seed, labels)."""
    entropy = [int(seed)] + [_label_entropy(lbl) for lbl in labels]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def torch_seed_for(seed: int, *labels: str) -> int:
    """Derived 63-bit seed for torch generators."""
    entropy = [int(seed)] + [_label_entropy(lbl) for lbl in labels]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0] >> 1)


def seed_torch(seed: int, *labels: str) -> None:
    torch.manual_seed(torch_seed_for(seed, *labels))


def single_threaded_torch() -> None:
    """Pin CPU math to one thread so reductions are bitwise reproducible."""
    torch.set_num_threads(1)

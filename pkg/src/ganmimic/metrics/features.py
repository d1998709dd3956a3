"""Deep feature extractors feeding the distribution-distance metric.

Two kinds are provided:

* ``FrozenRandomExtractor`` — a seeded, randomly initialized convolutional
  embedding. Hermetic (no downloaded weights) and deterministic, intended for
  tests and desk-scale experiments.
* ``InceptionPoolExtractor`` — the conventional pretrained pool-layer
  embedding (2048-d) for numbers comparable to published full-scale results.
  Requires torchvision weights to be available locally or downloadable.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..images import resize
from ..seeding import torch_seed_for


class FrozenRandomExtractor:
    """Frozen random conv embedding: same image in, same feature vector out."""

    kind = "frozen_random"

    def __init__(self, seed: int = 0, embedding_dim: int = 64, input_size: int = 32):
        self.seed = seed
        self.embedding_dim = embedding_dim
        self.input_size = input_size
        with torch.random.fork_rng():
            torch.manual_seed(torch_seed_for(seed, "frozen_random_extractor"))
            self._net = nn.Sequential(
                nn.Conv2d(3, 16, 3, stride=2, padding=1),
                nn.ReLU(),
                nn.Conv2d(16, 32, 3, stride=2, padding=1),
                nn.ReLU(),
                nn.Conv2d(32, embedding_dim, 3, stride=2, padding=1),
                nn.ReLU(),
                nn.AdaptiveAvgPool2d(1),
            )
        self._net.eval()
        for p in self._net.parameters():
            p.requires_grad_(False)

    def _prepare(self, img: np.ndarray) -> np.ndarray:
        arr = np.asarray(img, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.shape[2] == 1:
            arr = np.repeat(arr, 3, axis=2)
        if arr.shape[0] != self.input_size or arr.shape[1] != self.input_size:
            arr = resize(arr, (self.input_size, self.input_size), kernel="bilinear")
        return arr.astype(np.float32)

    def extract(self, images) -> np.ndarray:
        if len(images) == 0:
            return np.zeros((0, self.embedding_dim), dtype=np.float64)
        batch = np.stack([self._prepare(im) for im in images])
        with torch.no_grad():
            t = torch.from_numpy(batch).permute(0, 3, 1, 2).contiguous()
            feats = self._net(t).squeeze(-1).squeeze(-1)
        return feats.numpy().astype(np.float64)


class InceptionPoolExtractor:
    """Pretrained pool-layer embedding (2048-d)."""

    kind = "inception_pool"
    embedding_dim = 2048

    def __init__(self):
        try:
            from torchvision.models import Inception_V3_Weights, inception_v3
        except ImportError as exc:  # pragma: no cover - environment dependent
            raise RuntimeError(
                "torchvision is required for the pretrained extractor"
            ) from exc
        try:
            net = inception_v3(weights=Inception_V3_Weights.IMAGENET1K_V1)
        except Exception as exc:  # pragma: no cover - needs weight download
            raise RuntimeError(
                "pretrained inception weights unavailable; use the frozen random "
                "extractor for hermetic runs"
            ) from exc
        net.fc = nn.Identity()
        net.eval()
        for p in net.parameters():
            p.requires_grad_(False)
        self._net = net
        self.input_size = 299

    def _prepare(self, img: np.ndarray) -> np.ndarray:
        arr = np.asarray(img, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.shape[2] == 1:
            arr = np.repeat(arr, 3, axis=2)
        arr = resize(arr, (self.input_size, self.input_size), kernel="bilinear")
        # imagenet normalization
        mean = np.array([0.485, 0.456, 0.406])
        std = np.array([0.229, 0.224, 0.225])
        return ((arr - mean) / std).astype(np.float32)

    def extract(self, images) -> np.ndarray:
        if len(images) == 0:
            return np.zeros((0, self.embedding_dim), dtype=np.float64)
        feats = []
        with torch.no_grad():
            for start in range(0, len(images), 16):
                batch = np.stack([self._prepare(im) for im in images[start : start + 16]])
                t = torch.from_numpy(batch).permute(0, 3, 1, 2).contiguous()
                feats.append(self._net(t).numpy())
        return np.concatenate(feats).astype(np.float64)


def make_extractor(kind: str, **kwargs):
    if kind == "frozen_random":
        return FrozenRandomExtractor(**kwargs)
    if kind == "inception_pool":
        return InceptionPoolExtractor(**kwargs)
    raise ValueError(f"unknown extractor kind {kind!r}")

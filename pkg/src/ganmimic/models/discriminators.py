"""Discriminator architectures. Scores land in (0, 1) through a sigmoid head.

The patch discriminator emits a score map over receptive-field patches; the
image discriminator pools to one score per image, which suits the upscaling
task where realism is judged globally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from ..seeding import torch_seed_for

DISCRIMINATOR_FAMILIES = ("patchgan", "sr_discriminator")

_PRESETS = {
    "tiny": dict(base=8, n_down=2),
    "small": dict(base=32, n_down=3),
    "full": dict(base=64, n_down=3),
}


def _norm(channels):
    return nn.InstanceNorm2d(channels, affine=True, track_running_stats=False)


class PatchDiscriminator(nn.Module):
    def __init__(self, channels=3, base=8, n_down=2):
        super().__init__()
        layers = [
            nn.Conv2d(channels, base, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
        ]
        ch = base
        for _ in range(n_down - 1):
            layers += [
                nn.Conv2d(ch, ch * 2, 4, stride=2, padding=1),
                _norm(ch * 2),
                nn.LeakyReLU(0.2, inplace=True),
            ]
            ch *= 2
        layers += [nn.Conv2d(ch, 1, 4, padding=1), nn.Sigmoid()]
        self.net = nn.Sequential(*layers)

    def forward(self, x):
        return self.net(x)


class ImageDiscriminator(nn.Module):
    """Strided conv stack pooled to a single score per image."""

    def __init__(self, channels=3, base=8, n_down=2):
        super().__init__()
        layers = [
            nn.Conv2d(channels, base, 3, padding=1),
            nn.LeakyReLU(0.2, inplace=True),
        ]
        ch = base
        for _ in range(n_down):
            layers += [
                nn.Conv2d(ch, ch * 2, 3, stride=2, padding=1),
                _norm(ch * 2),
                nn.LeakyReLU(0.2, inplace=True),
            ]
            ch *= 2
        self.features = nn.Sequential(*layers)
        self.head = nn.Sequential(
            nn.AdaptiveAvgPool2d(1), nn.Conv2d(ch, 1, 1), nn.Sigmoid()
        )

    def forward(self, x):
        return self.head(self.features(x))


@dataclass(frozen=True)
class DiscriminatorSpec:
    family: str
    channels: int
    preset: str
    seed: int

    def __post_init__(self):
        if self.family not in DISCRIMINATOR_FAMILIES:
            raise ValueError(f"unknown discriminator family {self.family!r}")


class Discriminator:
    """A discriminator spec bound to its parameter store.

    ``scores`` flattens the (possibly per-patch) output map to one score
    vector per batch element, each in (0, 1).
    """

    def __init__(self, spec: DiscriminatorSpec, module: nn.Module):
        self.spec = spec
        self.module = module

    def forward(self, batch: torch.Tensor) -> torch.Tensor:
        return self.module(batch)

    __call__ = forward

    def scores(self, batch: torch.Tensor) -> torch.Tensor:
        out = self.module(batch)
        return out.reshape(out.shape[0], -1)

    def score_image(self, img: np.ndarray) -> float:
        arr = np.asarray(img, dtype=np.float32).transpose(2, 0, 1)
        with torch.no_grad():
            s = self.scores(torch.from_numpy(np.ascontiguousarray(arr))[None])
        return float(s.mean())

    def parameters(self):
        return self.module.parameters()

    def train(self):
        self.module.train()
        return self

    def eval(self):
        self.module.eval()
        return self


def build_discriminator(
    family: str, channels: int = 3, preset: str = "tiny", seed: int = 0
) -> Discriminator:
    if preset not in _PRESETS:
        raise ValueError(f"unknown preset {preset!r}")
    p = _PRESETS[preset]
    spec = DiscriminatorSpec(family=family, channels=channels, preset=preset, seed=seed)
    with torch.random.fork_rng():
        torch.manual_seed(torch_seed_for(seed, "discriminator", family, preset))
        if family == "patchgan":
            module = PatchDiscriminator(channels, base=p["base"], n_down=p["n_down"])
        else:
            module = ImageDiscriminator(channels, base=p["base"], n_down=p["n_down"])
    return Discriminator(spec, module)

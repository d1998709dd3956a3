"""Generator architectures: residual translator, UNet, and the x4 upscaler.

All generators map float images in [0, 1] to float images in [0, 1] (sigmoid
output head). Normalization layers are instance norms without running
statistics, so a generator computes the same function in train and eval mode
and checkpoints carry no buffer state.

Depth and width come from a size preset so the same architectures scale from
desk-size smoke runs to full training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from ..seeding import torch_seed_for

GENERATOR_FAMILIES = ("unet", "resnet_translator", "srresnet")

# width/depth per preset: base channel count, residual blocks, unet levels
_PRESETS = {
    "tiny": dict(base=8, n_res=2, depth=2),
    "small": dict(base=32, n_res=4, depth=3),
    "full": dict(base=64, n_res=9, depth=4),
}


def _norm(channels):
    return nn.InstanceNorm2d(channels, affine=True, track_running_stats=False)


class ResidualBlock(nn.Module):
    def __init__(self, channels):
        super().__init__()
        self.body = nn.Sequential(
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            _norm(channels),
            nn.ReLU(inplace=True),
            nn.ReflectionPad2d(1),
            nn.Conv2d(channels, channels, 3),
            _norm(channels),
        )

    def forward(self, x):
        return x + self.body(x)


class ResnetTranslator(nn.Module):
    """Downsample twice, run residual blocks, upsample back. Shape-preserving."""

    def __init__(self, channels=3, base=8, n_res=2):
        super().__init__()
        layers = [
            nn.ReflectionPad2d(3),
            nn.Conv2d(channels, base, 7),
            _norm(base),
            nn.ReLU(inplace=True),
        ]
        ch = base
        for _ in range(2):
            layers += [
                nn.Conv2d(ch, ch * 2, 3, stride=2, padding=1),
                _norm(ch * 2),
                nn.ReLU(inplace=True),
            ]
            ch *= 2
        layers += [ResidualBlock(ch) for _ in range(n_res)]
        for _ in range(2):
            layers += [
                nn.ConvTranspose2d(ch, ch // 2, 3, stride=2, padding=1, output_padding=1),
                _norm(ch // 2),
                nn.ReLU(inplace=True),
            ]
            ch //= 2
        layers += [nn.ReflectionPad2d(3), nn.Conv2d(ch, channels, 7), nn.Sigmoid()]
        self.net = nn.Sequential(*layers)

    def forward(self, x):
        return self.net(x)


class UNet(nn.Module):
    """Encoder-decoder with skip connections at every level."""

    def __init__(self, channels=3, base=8, depth=2):
        super().__init__()
        self.depth = depth
        downs = []
        ch = channels
        width = base
        for _ in range(depth):
            downs.append(
                nn.Sequential(
                    nn.Conv2d(ch, width, 4, stride=2, padding=1),
                    _norm(width),
                    nn.LeakyReLU(0.2, inplace=True),
                )
            )
            ch, width = width, width * 2
        self.downs = nn.ModuleList(downs)
        self.mid = nn.Sequential(
            nn.Conv2d(ch, ch, 3, padding=1),
            _norm(ch),
            nn.ReLU(inplace=True),
        )
        ups = []
        for i in range(depth):
            out_ch = ch // 2 if i < depth - 1 else base
            in_ch = ch * 2 if i > 0 else ch  # skip concat from the second step on
            ups.append(
                nn.Sequential(
                    nn.ConvTranspose2d(in_ch, out_ch, 4, stride=2, padding=1),
                    _norm(out_ch),
                    nn.ReLU(inplace=True),
                )
            )
            ch = out_ch
        self.ups = nn.ModuleList(ups)
        self.head = nn.Sequential(nn.Conv2d(base + channels, channels, 3, padding=1), nn.Sigmoid())

    def forward(self, x):
        skips = [x]
        h = x
        for down in self.downs:
            h = down(h)
            skips.append(h)
        h = self.mid(h)
        for i, up in enumerate(self.ups):
            if i > 0:
                h = torch.cat([h, skips[self.depth - i]], dim=1)
            h = up(h)
        return self.head(torch.cat([h, skips[0]], dim=1))


class SRResNet(nn.Module):
    """Residual-block upscaler with two pixel-shuffle x2 stages (x4 total)."""

    def __init__(self, channels=3, base=8, n_res=2):
        super().__init__()
        self.entry = nn.Sequential(nn.Conv2d(channels, base, 9, padding=4), nn.PReLU(base))
        self.blocks = nn.Sequential(*[ResidualBlock(base) for _ in range(n_res)])
        self.post = nn.Sequential(nn.Conv2d(base, base, 3, padding=1), _norm(base))
        up = []
        for _ in range(2):
            up += [
                nn.Conv2d(base, base * 4, 3, padding=1),
                nn.PixelShuffle(2),
                nn.PReLU(base),
            ]
        self.upsample = nn.Sequential(*up)
        self.head = nn.Sequential(nn.Conv2d(base, channels, 9, padding=4), nn.Sigmoid())

    def forward(self, x):
        h = self.entry(x)
        h = h + self.post(self.blocks(h))
        return self.head(self.upsample(h))


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    input_shape: tuple[int, int, int]  # (H, W, C)
    output_shape: tuple[int, int, int]
    scale_factor: int
    preset: str
    seed: int

    def __post_init__(self):
        if self.family not in GENERATOR_FAMILIES:
            raise ValueError(f"unknown generator family {self.family!r}")
        if self.family == "srresnet":
            if self.scale_factor != 4:
                raise ValueError("srresnet upscales by exactly 4")
        else:
            if self.scale_factor != 1:
                raise ValueError(f"{self.family} is shape-preserving (scale 1)")
            if self.input_shape != self.output_shape:
                raise ValueError("translator input and output shapes must match")
        h, w, c = self.input_shape
        oh, ow, oc = self.output_shape
        if (oh, ow) != (h * self.scale_factor, w * self.scale_factor) or oc != c:
            raise ValueError(
                f"output shape {self.output_shape} inconsistent with "
                f"input {self.input_shape} at scale {self.scale_factor}"
            )


class Generator:
    """A generator spec bound to its parameter store.

    ``forward`` runs on NCHW float tensors for training; ``apply`` takes and
    returns a single (H, W, C) numpy image in [0, 1].
    """

    def __init__(self, spec: GeneratorSpec, module: nn.Module):
        self.spec = spec
        self.module = module

    def forward(self, batch: torch.Tensor) -> torch.Tensor:
        return self.module(batch)

    __call__ = forward

    def apply(self, img: np.ndarray) -> np.ndarray:
        arr = np.asarray(img, dtype=np.float32)
        if arr.ndim != 3 or arr.shape[2] != self.spec.input_shape[2]:
            raise ValueError(
                f"expected (H, W, {self.spec.input_shape[2]}) image, got {arr.shape}"
            )
        t = torch.from_numpy(np.ascontiguousarray(arr.transpose(2, 0, 1)))[None]
        with torch.no_grad():
            out = self.module(t)
        return out[0].numpy().transpose(1, 2, 0)

    def apply_batch(self, imgs) -> list[np.ndarray]:
        return [self.apply(img) for img in imgs]

    def parameters(self):
        return self.module.parameters()

    def train(self):
        self.module.train()
        return self

    def eval(self):
        self.module.eval()
        return self


def build_generator(
    family: str,
    image_side: int,
    channels: int = 3,
    preset: str = "tiny",
    seed: int = 0,
) -> Generator:
    """Construct a generator with preset-scaled depth and seeded init.

    ``image_side`` is the input side length; the srresnet output side is four
    times that.
    """
    if preset not in _PRESETS:
        raise ValueError(f"unknown preset {preset!r}")
    p = _PRESETS[preset]
    scale = 4 if family == "srresnet" else 1
    if family == "resnet_translator":
        divisor = 4
    elif family == "unet":
        divisor = 2 ** p["depth"]
    else:
        divisor = 1
    if image_side % divisor != 0:
        raise ValueError(
            f"{family} ({preset}) needs the input side divisible by {divisor}, "
            f"got {image_side}"
        )
    spec = GeneratorSpec(
        family=family,
        input_shape=(image_side, image_side, channels),
        output_shape=(image_side * scale, image_side * scale, channels),
        scale_factor=scale,
        preset=preset,
        seed=seed,
    )
    with torch.random.fork_rng():
        torch.manual_seed(torch_seed_for(seed, "generator", family, preset))
        if family == "resnet_translator":
            module = ResnetTranslator(channels, base=p["base"], n_res=p["n_res"])
        elif family == "unet":
            module = UNet(channels, base=p["base"], depth=p["depth"])
        else:
            module = SRResNet(channels, base=p["base"], n_res=p["n_res"])
    return Generator(spec, module)

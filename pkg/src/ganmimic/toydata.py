"""Synthetic desk-scale datasets used by the acceptance runs and smoke tests.

The style task draws tilted elongated color blobs on a dark background; the
"styled" domain applies a fixed learnable transform (a squared inversion tone
curve, then soften). The transform commutes with horizontal flips but not
with contrast changes, matching the invariances that make flip augmentation
sound for real photo styling while contrast augmentation corrupts the target
style. The upscaling task uses sharp-edged rectangles, where a learned
upscaler has headroom over plain interpolation.
"""

from __future__ import annotations

import numpy as np

from .datasets import PairedDataset, UnpairedDataset
from .images import clip01, gaussian_blur, resize
from .seeding import rng_for

TILTS = ("both", "pos", "neg")


def _tilt_angle(rng: np.random.Generator, tilt: str) -> float:
    """Blob long-axis angle in radians; ``pos`` leans one way, ``neg`` the
    mirror way, ``both`` picks a side at random."""
    if tilt not in TILTS:
        raise ValueError(f"tilt must be one of {TILTS}, got {tilt!r}")
    angle = rng.uniform(np.deg2rad(15.0), np.deg2rad(75.0))
    if tilt == "neg" or (tilt == "both" and rng.uniform() < 0.5):
        angle = -angle
    return angle


def blob_image(
    rng: np.random.Generator, side: int = 32, n_blobs: int = 3, tilt: str = "both"
) -> np.ndarray:
    """Sum of random soft elongated color blobs, values in [0, 1].

    Each blob is an anisotropic Gaussian tilted away from the axes, so a
    horizontally flipped image shows the mirror orientation rather than a
    lookalike of a fresh sample.
    """
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64) / side
    img = np.zeros((side, side, 3), dtype=np.float64)
    img += rng.uniform(0.0, 0.15)
    for _ in range(n_blobs):
        cy, cx = rng.uniform(0.15, 0.85, size=2)
        radius = rng.uniform(0.1, 0.3)
        color = rng.uniform(0.3, 1.0, size=3)
        angle = _tilt_angle(rng, tilt)
        dy, dx = yy - cy, xx - cx
        u = dx * np.cos(angle) + dy * np.sin(angle)
        v = -dx * np.sin(angle) + dy * np.cos(angle)
        major, minor = radius * 1.8, radius * 0.55
        bump = np.exp(-(u**2 / (2 * major**2) + v**2 / (2 * minor**2)))
        img += bump[:, :, None] * color[None, None, :]
    return clip01(img).astype(np.float32)


def toy_style(img: np.ndarray) -> np.ndarray:
    """The ground-truth styling map: squared color inversion, then soften."""
    inverted = (1.0 - np.asarray(img, dtype=np.float64)) ** 2
    return gaussian_blur(inverted, sigma=1.0, radius=2)


def rect_image(rng: np.random.Generator, side: int = 32, n_rects: int = 4) -> np.ndarray:
    """Axis-aligned filled rectangles on a flat background; hard edges."""
    img = np.full((side, side, 3), rng.uniform(0.0, 0.2), dtype=np.float64)
    for _ in range(n_rects):
        y0, x0 = rng.integers(0, side - 4, size=2)
        h = int(rng.integers(4, side // 2))
        w = int(rng.integers(4, side // 2))
        color = rng.uniform(0.2, 1.0, size=3)
        img[y0 : y0 + h, x0 : x0 + w] = color
    return clip01(img).astype(np.float32)


def make_style_dataset(
    n_per_side: int, side: int = 32, seed: int = 0, split: str = "train", tilt: str = "both"
) -> UnpairedDataset:
    """Unpaired blob domain A and styled-blob domain B (disjoint sources)."""
    rng_a = rng_for(seed, "toy_style", split, "domain_a")
    rng_b = rng_for(seed, "toy_style", split, "domain_b")
    domain_a = [blob_image(rng_a, side, tilt=tilt) for _ in range(n_per_side)]
    domain_b = [toy_style(blob_image(rng_b, side, tilt=tilt)) for _ in range(n_per_side)]
    return UnpairedDataset(domain_a=domain_a, domain_b=domain_b, split=split)


def make_style_inputs(
    n: int, side: int = 32, seed: int = 0, tag: str = "query", tilt: str = "both"
) -> list[np.ndarray]:
    """Fresh unstyled images for querying a style service.

    ``tilt`` narrows the blob orientations, modeling a query pool that covers
    only part of the serving distribution.
    """
    rng = rng_for(seed, "toy_style_inputs", tag)
    return [blob_image(rng, side, tilt=tilt) for _ in range(n)]


def make_sr_dataset(
    n: int, hr_side: int = 32, seed: int = 0, split: str = "train"
) -> PairedDataset:
    """(low-res, high-res) pairs from rectangle scenes, 4x apart."""
    if hr_side % 4 != 0:
        raise ValueError(f"hr_side must be divisible by 4, got {hr_side}")
    rng = rng_for(seed, "toy_sr", split)
    pairs = []
    for _ in range(n):
        hr = rect_image(rng, hr_side)
        lr = resize(hr, (hr_side // 4, hr_side // 4), kernel="bicubic", antialias=True)
        pairs.append((lr, hr))
    return PairedDataset(pairs=tuple(pairs), split=split)

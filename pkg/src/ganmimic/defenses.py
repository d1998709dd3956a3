"""Defenses a victim service can enable: trigger watermarking and output
poisoning.

Watermarking marks a small fraction of responses with a visible image
modification and keeps the (query, marked response) pairs as a trigger set;
ownership of a suspect model is then claimed when the suspect reproduces the
marked responses. Poisoning perturbs every response adversarially against a
discriminator so that training on harvested pairs degrades.
"""

from __future__ import annotations

import hashlib
import hmac
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image, ImageDraw

from .datasets import PairedDataset, save_paired_dataset
from .images import clip01, gaussian_blur, luma, quantize
from .metrics import ssim

TRIGGER_KINDS = ("blur", "monochrome", "text")

DEFAULT_WATERMARK_RATE = 0.005
DEFAULT_VERIFY_THRESHOLD = 0.9

PGD_EPSILON = 0.25
PGD_STEPS = 50

_TEXT_STRING = "MARKED"
_TEXT_POSITION = (2, 2)
_TEXT_OPACITY = 0.85

_BLUR_SIGMA = 2.0
_BLUR_RADIUS = 4  # 9x9 kernel


def watermark_select(input_digest: str, secret_key: bytes, rate: float) -> bool:
    """Keyed-hash coin flip: mark iff the top 64 bits of
    HMAC-SHA256(key, digest) fall below floor(rate * 2^64).

    Deterministic per (digest, key); positive probability ``rate`` over
    uniform digests.
    """
    if not (0.0 < rate < 1.0):
        raise ValueError(f"rate must be in (0, 1), got {rate}")
    if isinstance(secret_key, str):
        secret_key = secret_key.encode("utf-8")
    mac = hmac.new(secret_key, input_digest.encode("ascii"), hashlib.sha256)
    top = int.from_bytes(mac.digest()[:8], "big")
    return top < math.floor(rate * 2**64)


def apply_trigger(image: np.ndarray, kind: str) -> np.ndarray:
    """Visible modification stamped on marked responses. Deterministic."""
    arr = np.asarray(image, dtype=np.float64)
    if kind == "blur":
        return gaussian_blur(arr, sigma=_BLUR_SIGMA, radius=_BLUR_RADIUS)
    if kind == "monochrome":
        if arr.shape[2] == 1 or all(
            np.array_equal(arr[:, :, 0], arr[:, :, c]) for c in range(1, arr.shape[2])
        ):
            return arr.astype(np.float32).copy()
        gray = luma(arr)
        return clip01(np.repeat(gray[:, :, None], arr.shape[2], axis=2)).astype(
            np.float32
        )
    if kind == "text":
        h, w = arr.shape[:2]
        mask_img = Image.new("L", (w, h), 0)
        ImageDraw.Draw(mask_img).text(_TEXT_POSITION, _TEXT_STRING, fill=255)
        mask = np.asarray(mask_img, dtype=np.float64) / 255.0
        out = arr * (1.0 - _TEXT_OPACITY * mask[:, :, None]) + _TEXT_OPACITY * mask[
            :, :, None
        ]
        return clip01(out).astype(np.float32)
    raise ValueError(f"unknown trigger kind {kind!r}")


def key_commitment(secret_key: bytes) -> str:
    """Public hash of the watermarking key, for later audit."""
    if isinstance(secret_key, str):
        secret_key = secret_key.encode("utf-8")
    return hashlib.sha256(secret_key).hexdigest()


class WatermarkHook:
    """Service defense hook: mark a fraction of responses, keep the triggers.

    hash mode: keyed-hash decision per input digest (client-independent,
    reproducible). quota mode: mark the k-th query whenever marked-so-far is
    below ceil(rate * k), which gives exactly ceil(rate * N) marks after any
    N queries.
    """

    name = "watermark"

    def __init__(
        self,
        secret_key,
        rate: float = DEFAULT_WATERMARK_RATE,
        mode: str = "hash",
        trigger_kind: str = "blur",
    ):
        if mode not in ("hash", "quota"):
            raise ValueError(f"unknown watermark mode {mode!r}")
        if trigger_kind not in TRIGGER_KINDS:
            raise ValueError(f"unknown trigger kind {trigger_kind!r}")
        if not (0.0 < rate < 1.0):
            raise ValueError(f"rate must be in (0, 1), got {rate}")
        self.secret_key = (
            secret_key.encode("utf-8") if isinstance(secret_key, str) else secret_key
        )
        self.rate = rate
        self.mode = mode
        self.trigger_kind = trigger_kind
        self.triggers: list[tuple[np.ndarray, np.ndarray]] = []

    def _decide(self, input_digest: str, stats) -> bool:
        if self.mode == "hash":
            return watermark_select(input_digest, self.secret_key, self.rate)
        return stats.defended < math.ceil(self.rate * stats.queries)

    def __call__(self, input_image, output_image, input_digest, stats):
        if not self._decide(input_digest, stats):
            return output_image, False
        marked = quantize(apply_trigger(output_image, self.trigger_kind))
        # store the quantized input: same 8-bit digest as the original query,
        # so the pair survives a PNG roundtrip bit for bit
        self.triggers.append((quantize(np.asarray(input_image)), marked))
        return marked, True

    def trigger_set(self) -> PairedDataset:
        return PairedDataset(pairs=tuple(self.triggers), split="trigger")

    def save_trigger_store(self, directory) -> Path:
        """Trigger pairs in the paired layout plus the key commitment."""
        directory = Path(directory)
        save_paired_dataset(self.trigger_set(), directory)
        (directory / "key_commitment.txt").write_text(
            key_commitment(self.secret_key) + "\n"
        )
        return directory


@dataclass(frozen=True)
class VerificationReport:
    similarities: tuple[float, ...]
    matches: tuple[bool, ...]
    match_rate: float
    threshold: float
    decision: bool  # True = watermark retained; theft claim supported


def verify_watermark(
    model, trigger_set: PairedDataset, threshold: float = DEFAULT_VERIFY_THRESHOLD
) -> VerificationReport:
    """Replay trigger inputs through ``model`` and compare to stored outputs.

    ``model`` is anything with ``.apply(image)`` or a bare callable.
    """
    if len(trigger_set) == 0:
        raise ValueError("trigger set is empty")
    transform = model.apply if hasattr(model, "apply") else model
    sims = []
    for trigger_input, stored_output in trigger_set.pairs:
        replayed = transform(trigger_input)
        if replayed.shape != stored_output.shape:
            raise ValueError(
                f"model output shape {replayed.shape} does not match stored "
                f"trigger {stored_output.shape}"
            )
        sims.append(float(ssim(replayed, stored_output)))
    matches = tuple(s >= threshold for s in sims)
    rate = sum(matches) / len(matches)
    return VerificationReport(
        similarities=tuple(sims),
        matches=matches,
        match_rate=rate,
        threshold=threshold,
        decision=rate >= 0.5,
    )


PGD_DIRECTIONS = ("flip", "toward_fake", "toward_real")


def pgd_perturb_batch(
    images: np.ndarray,
    d,
    epsilon: float = PGD_EPSILON,
    steps: int = PGD_STEPS,
    step_size: float | None = None,
    direction: str = "flip",
) -> np.ndarray:
    """Signed-gradient perturbation of a batch, projected to the ℓ∞ ball.

    ``images`` is (N, H, W, C). direction "toward_fake" descends the
    discriminator score, "toward_real" ascends it, and "flip" (default)
    pushes each sample across its initial decision boundary, whichever side
    it starts on.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if direction not in PGD_DIRECTIONS:
        raise ValueError(f"unknown direction {direction!r}")
    if step_size is None:
        step_size = epsilon / 10.0
    arr = np.asarray(images, dtype=np.float32)
    if arr.ndim != 4:
        raise ValueError(f"expected a (N, H, W, C) batch, got shape {arr.shape}")
    x0 = torch.from_numpy(np.ascontiguousarray(arr.transpose(0, 3, 1, 2)))
    x = x0.clone()
    if steps == 0:
        return arr.copy()

    with torch.no_grad():
        init_scores = d.scores(x0).mean(dim=1)
    if direction == "toward_fake":
        target = torch.zeros_like(init_scores)
    elif direction == "toward_real":
        target = torch.ones_like(init_scores)
    else:
        target = (init_scores < 0.5).float()  # cross to the other side

    for _ in range(steps):
        x_var = x.clone().requires_grad_(True)
        scores = d.scores(x_var).clamp(1e-7, 1.0 - 1e-7)
        per_sample = -(
            target[:, None] * torch.log(scores)
            + (1.0 - target[:, None]) * torch.log(1.0 - scores)
        ).mean(dim=1)
        per_sample.sum().backward()
        grad = x_var.grad
        if grad is None or not torch.isfinite(grad).all():
            break
        with torch.no_grad():
            x = x - step_size * grad.sign()
            x = torch.clamp(x, x0 - epsilon, x0 + epsilon)
            x = torch.clamp(x, 0.0, 1.0)
    out = x.numpy().transpose(0, 2, 3, 1)
    # the projection guarantee, re-asserted on every call
    assert float(np.abs(out - arr).max()) <= epsilon + 1e-6
    assert out.min() >= 0.0 and out.max() <= 1.0
    return out


def pgd_perturb(
    image: np.ndarray,
    d,
    epsilon: float = PGD_EPSILON,
    steps: int = PGD_STEPS,
    step_size: float | None = None,
    direction: str = "flip",
) -> np.ndarray:
    """Single-image form of ``pgd_perturb_batch``."""
    out = pgd_perturb_batch(
        np.asarray(image)[None], d, epsilon, steps, step_size, direction
    )
    return out[0]


def decision_flip_rate(d, originals: np.ndarray, perturbed: np.ndarray) -> float:
    """Fraction of samples whose real/fake decision changed."""
    a = torch.from_numpy(
        np.ascontiguousarray(np.asarray(originals, dtype=np.float32).transpose(0, 3, 1, 2))
    )
    b = torch.from_numpy(
        np.ascontiguousarray(np.asarray(perturbed, dtype=np.float32).transpose(0, 3, 1, 2))
    )
    with torch.no_grad():
        before = d.scores(a).mean(dim=1) >= 0.5
        after = d.scores(b).mean(dim=1) >= 0.5
    return float((before != after).float().mean())


class PoisonHook:
    """Service defense hook: adversarially perturb every response."""

    name = "poison"

    def __init__(
        self,
        discriminator,
        epsilon: float = PGD_EPSILON,
        steps: int = PGD_STEPS,
        step_size: float | None = None,
        direction: str = "flip",
    ):
        self.discriminator = discriminator
        self.epsilon = epsilon
        self.steps = steps
        self.step_size = step_size
        self.direction = direction

    def __call__(self, input_image, output_image, input_digest, stats):
        poisoned = pgd_perturb(
            output_image,
            self.discriminator,
            epsilon=self.epsilon,
            steps=self.steps,
            step_size=self.step_size,
            direction=self.direction,
        )
        return poisoned, True

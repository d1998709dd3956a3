"""Loss functions for adversarial training.

Every public loss returns a scalar torch tensor that is differentiable with
respect to the relevant model parameters; call ``float()`` on the result when
only the number is needed. Discriminator outputs are clamped away from {0, 1}
before any log so the values stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch

D_EPS = 1e-7

ADVERSARIAL_FORMS = ("minimax", "nonsaturating")


@dataclass(frozen=True)
class LossConfig:
    lambda_identity: float = 100.0
    lambda_cycle: float = 10.0
    adversarial_form: str = "nonsaturating"

    def __post_init__(self):
        for name in ("lambda_identity", "lambda_cycle"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.adversarial_form not in ADVERSARIAL_FORMS:
            raise ValueError(f"unknown adversarial_form {self.adversarial_form!r}")


def as_batch_tensor(batch) -> torch.Tensor:
    """Accept an NCHW tensor or a sequence of (H, W, C) arrays."""
    if isinstance(batch, torch.Tensor):
        if batch.ndim != 4:
            raise ValueError(f"expected a 4-d batch tensor, got shape {tuple(batch.shape)}")
        return batch
    arrs = [np.asarray(img, dtype=np.float32) for img in batch]
    if not arrs:
        raise ValueError("batch is empty")
    stacked = np.stack([a.transpose(2, 0, 1) for a in arrs])
    return torch.from_numpy(np.ascontiguousarray(stacked))


def _clamped_scores(d, batch: torch.Tensor) -> torch.Tensor:
    return d.scores(batch).clamp(D_EPS, 1.0 - D_EPS)


def gan_value(d, g, real_batch, gen_input_batch) -> torch.Tensor:
    """Empirical two-player value: E[log D(x)] + E[log(1 - D(G(z)))].

    The discriminator ascends this; the generator descends it. Expectations
    are over the two supplied batches.
    """
    real = as_batch_tensor(real_batch)
    gen_in = as_batch_tensor(gen_input_batch)
    if real.shape[0] == 0 or gen_in.shape[0] == 0:
        raise ValueError("batches must be non-empty")
    d_real = _clamped_scores(d, real)
    d_fake = _clamped_scores(d, g(gen_in))
    return torch.log(d_real).mean() + torch.log(1.0 - d_fake).mean()


def generator_adversarial_loss(d, fake_batch, form: str = "nonsaturating") -> torch.Tensor:
    """The generator's term to minimize, for already-generated outputs.

    nonsaturating: mean of -log D(fake). minimax: mean of log(1 - D(fake)),
    the generator's slice of the value function.
    """
    d_fake = _clamped_scores(d, as_batch_tensor(fake_batch))
    if form == "nonsaturating":
        return -torch.log(d_fake).mean()
    if form == "minimax":
        return torch.log(1.0 - d_fake).mean()
    raise ValueError(f"unknown adversarial form {form!r}")


def discriminator_loss(d, g, real_batch, gen_input_batch) -> torch.Tensor:
    """Negated value function; minimizing it maximizes V(G, D)."""
    gen_in = as_batch_tensor(gen_input_batch)
    with torch.no_grad():
        fake = g(gen_in)
    real = as_batch_tensor(real_batch)
    d_real = _clamped_scores(d, real)
    d_fake = _clamped_scores(d, fake)
    return -(torch.log(d_real).mean() + torch.log(1.0 - d_fake).mean())


def _one_or_many(x) -> torch.Tensor:
    """A single (H, W, C) image, a batch tensor, or a sequence of images."""
    if isinstance(x, torch.Tensor):
        return x if x.ndim == 4 else x[None]
    arr = np.asarray(x, dtype=np.float32)
    if arr.ndim == 3:
        return as_batch_tensor([arr])
    return as_batch_tensor(list(x))


def pix2pix_generator_loss(g, d, pair, cfg: LossConfig = LossConfig()) -> torch.Tensor:
    """Adversarial term plus weighted mean absolute deviation from the target."""
    inputs = _one_or_many(pair[0])
    targets = _one_or_many(pair[1])
    fake = g(inputs)
    if fake.shape != targets.shape:
        raise ValueError(
            f"generator output {tuple(fake.shape)} does not match targets {tuple(targets.shape)}"
        )
    adv = generator_adversarial_loss(d, fake, cfg.adversarial_form)
    identity = (fake - targets).abs().mean()
    return adv + cfg.lambda_identity * identity


def cycle_consistency_loss(g_ab, g_ba, batch_a, batch_b) -> torch.Tensor:
    """Round-trip reconstruction error, summed over both directions."""
    a = as_batch_tensor(batch_a)
    b = as_batch_tensor(batch_b)
    if a.shape[1:] != b.shape[1:]:
        raise ValueError("the two domains must share the image shape")
    aba = g_ba(g_ab(a))
    bab = g_ab(g_ba(b))
    return (aba - a).abs().mean() + (bab - b).abs().mean()


def identity_regularizer(g, batch) -> torch.Tensor:
    """Deviation of g from the identity on its own output domain."""
    x = as_batch_tensor(batch)
    return (g(x) - x).abs().mean()

"""Victim model training: unpaired style translation and supervised upscaling.

Both trainers are deterministic for a fixed seed (single-threaded CPU math,
derived seeds per component) and record their loss trajectory step by step.
A non-finite loss aborts training and the error carries the models as of the
last finite epoch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .config import ExperimentConfig
from .images import resize
from .models import (
    Discriminator,
    Generator,
    LossConfig,
    as_batch_tensor,
    build_discriminator,
    build_generator,
    cycle_consistency_loss,
    discriminator_loss,
    generator_adversarial_loss,
    identity_regularizer,
)
from .seeding import rng_for, seed_torch, single_threaded_torch


class TrainingDivergedError(RuntimeError):
    """Loss went non-finite. ``result`` holds the last finite state."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass
class UnpairedTrainResult:
    g_ab: Generator
    g_ba: Generator
    d_a: Discriminator
    d_b: Discriminator
    history: list[dict] = field(default_factory=list)


@dataclass
class SrTrainResult:
    generator: Generator
    discriminator: Discriminator
    history: list[dict] = field(default_factory=list)


def _write_log(log_path, records):
    if log_path is None:
        return
    log_path = Path(log_path)
    log_path.parent.mkdir(parents=True, exist_ok=True)
    with open(log_path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def _finite(*values):
    return all(math.isfinite(v) for v in values)


def _batches(arrays, order, batch_size):
    for start in range(0, len(order), batch_size):
        idx = order[start : start + batch_size]
        yield as_batch_tensor([arrays[i] for i in idx])


def train_unpaired_victim(
    data, cfg: ExperimentConfig, log_path=None, loss_cfg: LossConfig = LossConfig()
) -> UnpairedTrainResult:
    """Two-generator, two-discriminator adversarial training with cycle terms.

    Returns the A→B generator (the victim mapping) together with the reverse
    generator and both discriminators.
    """
    if not data.domain_a or not data.domain_b:
        raise ValueError("both domains must be non-empty")
    single_threaded_torch()
    side = data.domain_a[0].shape[0]
    channels = data.domain_a[0].shape[2]
    seed_torch(cfg.seed, "victim_unpaired_train")
    g_ab = build_generator("resnet_translator", side, channels, cfg.preset, cfg.seed)
    g_ba = build_generator("resnet_translator", side, channels, cfg.preset, cfg.seed + 1)
    d_a = build_discriminator("patchgan", channels, cfg.preset, cfg.seed)
    d_b = build_discriminator("patchgan", channels, cfg.preset, cfg.seed + 1)
    result = UnpairedTrainResult(g_ab=g_ab, g_ba=g_ba, d_a=d_a, d_b=d_b)

    params_g = list(g_ab.parameters()) + list(g_ba.parameters())
    params_d = list(d_a.parameters()) + list(d_b.parameters())
    opt_g = torch.optim.Adam(params_g, lr=cfg.learning_rate, betas=(0.5, 0.999))
    opt_d = torch.optim.Adam(params_d, lr=cfg.learning_rate, betas=(0.5, 0.999))

    n = min(len(data.domain_a), len(data.domain_b))
    lam_cycle = loss_cfg.lambda_cycle
    lam_ident = 0.5 * lam_cycle

    last_good = _snapshot(g_ab, g_ba, d_a, d_b)
    for epoch in range(cfg.epochs):
        rng = rng_for(cfg.seed, "victim_unpaired_order", str(epoch))
        order_a = rng.permutation(len(data.domain_a))[:n]
        order_b = rng.permutation(len(data.domain_b))[:n]
        for step, (a, b) in enumerate(
            zip(
                _batches(data.domain_a, order_a, cfg.batch_size),
                _batches(data.domain_b, order_b, cfg.batch_size),
            )
        ):
            opt_d.zero_grad()
            d_loss = discriminator_loss(d_b, g_ab, b, a) + discriminator_loss(
                d_a, g_ba, a, b
            )
            d_loss.backward()
            opt_d.step()

            opt_g.zero_grad()
            fake_b = g_ab(a)
            fake_a = g_ba(b)
            adv = generator_adversarial_loss(
                d_b, fake_b, loss_cfg.adversarial_form
            ) + generator_adversarial_loss(d_a, fake_a, loss_cfg.adversarial_form)
            cyc = cycle_consistency_loss(g_ab, g_ba, a, b)
            ident = identity_regularizer(g_ab, b) + identity_regularizer(g_ba, a)
            g_loss = adv + lam_cycle * cyc + lam_ident * ident
            g_loss.backward()
            opt_g.step()

            rec = {
                "epoch": epoch,
                "step": step,
                "d_loss": d_loss.item(),
                "g_loss": g_loss.item(),
                "adversarial": adv.item(),
                "cycle": cyc.item(),
                "identity": ident.item(),
            }
            result.history.append(rec)
            if not _finite(rec["d_loss"], rec["g_loss"]):
                _restore(last_good, g_ab, g_ba, d_a, d_b)
                _write_log(log_path, result.history)
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch} step {step}", result
                )
        last_good = _snapshot(g_ab, g_ba, d_a, d_b)
    for model in (g_ab, g_ba, d_a, d_b):
        model.eval()
    _write_log(log_path, result.history)
    return result


def _snapshot(*models):
    return [
        {k: v.detach().clone() for k, v in m.module.state_dict().items()}
        for m in models
    ]


def _restore(snapshot, *models):
    for state, m in zip(snapshot, models):
        m.module.load_state_dict(state)


def make_lr(hr: np.ndarray) -> np.ndarray:
    """Quarter-size bicubic downscale of a high-resolution image."""
    arr = np.asarray(hr)
    h, w = arr.shape[:2]
    if h % 4 != 0 or w % 4 != 0:
        raise ValueError(f"image dims must be divisible by 4, got {h}x{w}")
    return resize(arr, (h // 4, w // 4), kernel="bicubic", antialias=True)


def bicubic_upscale(lr: np.ndarray, factor: int = 4) -> np.ndarray:
    """Plain interpolation baseline for the learned upscaler."""
    arr = np.asarray(lr)
    h, w = arr.shape[:2]
    return resize(arr, (h * factor, w * factor), kernel="bicubic", antialias=False)


def train_sr_victim(
    pairs, cfg: ExperimentConfig, log_path=None, loss_cfg: LossConfig = LossConfig()
) -> SrTrainResult:
    """Supervised x4 upscaler with a jointly trained image discriminator."""
    if len(pairs) == 0:
        raise ValueError("training set is empty")
    for lr_img, hr_img in pairs.pairs:
        if hr_img.shape[0] != 4 * lr_img.shape[0] or hr_img.shape[1] != 4 * lr_img.shape[1]:
            raise ValueError(
                f"target dims {hr_img.shape[:2]} are not 4x input dims {lr_img.shape[:2]}"
            )
    single_threaded_torch()
    lr_side = pairs.pairs[0][0].shape[0]
    channels = pairs.pairs[0][0].shape[2]
    seed_torch(cfg.seed, "victim_sr_train")
    gen = build_generator("srresnet", lr_side, channels, cfg.preset, cfg.seed)
    disc = build_discriminator("sr_discriminator", channels, cfg.preset, cfg.seed)
    result = SrTrainResult(generator=gen, discriminator=disc)

    opt_g = torch.optim.Adam(gen.parameters(), lr=cfg.learning_rate, betas=(0.5, 0.999))
    opt_d = torch.optim.Adam(disc.parameters(), lr=cfg.learning_rate, betas=(0.5, 0.999))

    inputs = pairs.inputs
    targets = pairs.targets
    last_good = _snapshot(gen, disc)
    for epoch in range(cfg.epochs):
        rng = rng_for(cfg.seed, "victim_sr_order", str(epoch))
        order = rng.permutation(len(inputs))
        for step, (lr_b, hr_b) in enumerate(
            zip(
                _batches(inputs, order, cfg.batch_size),
                _batches(targets, order, cfg.batch_size),
            )
        ):
            opt_d.zero_grad()
            d_loss = discriminator_loss(disc, gen, hr_b, lr_b)
            d_loss.backward()
            opt_d.step()

            opt_g.zero_grad()
            fake = gen(lr_b)
            adv = generator_adversarial_loss(disc, fake, loss_cfg.adversarial_form)
            identity = (fake - hr_b).abs().mean()
            g_loss = adv + loss_cfg.lambda_identity * identity
            g_loss.backward()
            opt_g.step()

            rec = {
                "epoch": epoch,
                "step": step,
                "d_loss": d_loss.item(),
                "g_loss": g_loss.item(),
                "adversarial": adv.item(),
                "identity": identity.item(),
            }
            result.history.append(rec)
            if not _finite(rec["d_loss"], rec["g_loss"]):
                _restore(last_good, gen, disc)
                _write_log(log_path, result.history)
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch} step {step}", result
                )
        last_good = _snapshot(gen, disc)
    gen.eval()
    disc.eval()
    _write_log(log_path, result.history)
    return result

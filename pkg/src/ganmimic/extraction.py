"""The adversary's side: harvest pairs through the query API, enlarge them
with local augmentations, and fit a surrogate to the harvested mapping.

Harvesting sees only the service interface. Nothing in this module touches
victim parameters, training data, or style sources.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from scipy.ndimage import rotate as ndimage_rotate

from .config import ExperimentConfig
from .datasets import PairedDataset, pair_names, save_paired_dataset
from .images import clip01, image_digest, resize
from .metrics import ssim
from .models import (
    Discriminator,
    Generator,
    LossConfig,
    build_discriminator,
    build_generator,
    discriminator_loss,
    pix2pix_generator_loss,
)
from .seeding import rng_for, seed_torch, single_threaded_torch
from .victims import _batches, _restore, _snapshot, _write_log, _finite, TrainingDivergedError

AUGMENT_OPS = ("flip", "rotate5", "cutout", "contrast")

SURROGATE_ARCHS = ("pix2pix", "srresnet")

_CUTOUT_KEEP = 0.75
_CONTRAST_GAIN = 1.2
_ROTATE_DEGREES = 5.0


class AugmentationError(ValueError):
    pass


# --- harvesting -------------------------------------------------------------


def harvest(
    service,
    client_id: str,
    inputs,
    out_dir: str | Path | None = None,
    parallelism: int = 1,
) -> PairedDataset:
    """Query the service once per input and pair responses with their inputs.

    Pairs come back in input order. If the budget runs out partway, whatever
    was harvested is persisted (when ``out_dir`` is given) and attached to the
    raised error as ``partial`` before it propagates.
    """
    inputs = list(inputs)
    if not inputs:
        raise ValueError("inputs must be non-empty")
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")

    outputs: dict[int, np.ndarray] = {}
    failure: Exception | None = None
    if parallelism == 1:
        for i, x in enumerate(inputs):
            try:
                outputs[i] = service.transform(client_id, x)
            except Exception as exc:
                failure = exc
                break
    else:
        def _query(i):
            return i, service.transform(client_id, inputs[i])

        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = [pool.submit(_query, i) for i in range(len(inputs))]
            errors = []
            for fut in futures:
                try:
                    i, out = fut.result()
                    outputs[i] = out
                except Exception as exc:
                    errors.append(exc)
            if errors:
                failure = errors[0]

    pairs = tuple((inputs[i], outputs[i]) for i in sorted(outputs))
    ds = PairedDataset(pairs=pairs, split="harvest")
    if out_dir is not None and (failure is None or pairs):
        _persist_harvest(ds, out_dir, client_id)
    if failure is not None:
        failure.partial = ds
        raise failure
    return ds


def _persist_harvest(ds: PairedDataset, out_dir, client_id: str) -> None:
    out_dir = Path(out_dir)
    save_paired_dataset(ds, out_dir)
    manifest = {
        "client_id": client_id,
        "pairs": [
            {
                "name": name,
                "input_digest": image_digest(x),
                "output_ref": image_digest(y),
            }
            for name, (x, y) in zip(pair_names(len(ds.pairs)), ds.pairs)
        ],
    }
    with open(out_dir / "provenance.json", "w") as fh:
        json.dump(manifest, fh, indent=2)


def load_provenance(out_dir) -> dict:
    with open(Path(out_dir) / "provenance.json") as fh:
        return json.load(fh)


# --- augmentation -----------------------------------------------------------


def _flip(img):
    return np.ascontiguousarray(np.asarray(img)[:, ::-1])


def _rotate(img, angle):
    arr = ndimage_rotate(
        np.asarray(img, dtype=np.float64),
        angle,
        axes=(1, 0),
        reshape=False,
        order=1,
        mode="nearest",
    )
    return clip01(arr).astype(np.float32)


def _contrast(img):
    arr = np.asarray(img, dtype=np.float64)
    return clip01(0.5 + _CONTRAST_GAIN * (arr - 0.5)).astype(np.float32)


def augment(pair, op: str, rng: np.random.Generator | None = None):
    """One augmented copy of a harvested pair; both elements transformed
    consistently so the pairing stays valid."""
    if op not in AUGMENT_OPS:
        raise AugmentationError(f"unknown augmentation {op!r}")
    x, y = np.asarray(pair[0]), np.asarray(pair[1])
    if op == "flip":
        return _flip(x), _flip(y)
    if op == "contrast":
        return _contrast(x), _contrast(y)
    if rng is None:
        rng = np.random.default_rng()
    if op == "rotate5":
        angle = float(rng.choice([-_ROTATE_DEGREES, _ROTATE_DEGREES]))
        return _rotate(x, angle), _rotate(y, angle)
    # cutout: crop both elements to the same relative window, resize back
    if x.shape[:2] != y.shape[:2]:
        raise AugmentationError(
            "cutout needs same-size pair elements; it is not applicable to "
            "super-resolution pairs"
        )
    h, w = x.shape[:2]
    ch, cw = round(_CUTOUT_KEEP * h), round(_CUTOUT_KEEP * w)
    y0 = int(rng.integers(0, h - ch + 1))
    x0 = int(rng.integers(0, w - cw + 1))

    def crop_resize(img, out_hw):
        piece = np.asarray(img)[y0 : y0 + ch, x0 : x0 + cw]
        return resize(piece, out_hw, kernel="bicubic", antialias=True)

    return crop_resize(x, (h, w)), crop_resize(y, (h, w))


def augment_dataset(ds: PairedDataset, ops, seed: int = 0) -> PairedDataset:
    """Enlarge a dataset: originals plus one augmented copy per enabled op."""
    ops = tuple(ops)
    for op in ops:
        if op not in AUGMENT_OPS:
            raise AugmentationError(f"unknown augmentation {op!r}")
    out = list(ds.pairs)
    for op in ops:
        for i, pair in enumerate(ds.pairs):
            rng = rng_for(seed, "augment", op, str(i))
            out.append(augment(pair, op, rng))
    return PairedDataset(pairs=tuple(out), split=ds.split)


# --- surrogate training -----------------------------------------------------


@dataclass
class SurrogateTrainResult:
    generator: Generator
    discriminator: Discriminator
    history: list[dict] = field(default_factory=list)


def train_surrogate(
    pairs: PairedDataset,
    arch: str,
    cfg: ExperimentConfig,
    log_path=None,
    loss_cfg: LossConfig = LossConfig(),
) -> SurrogateTrainResult:
    """Supervised fit to harvested (input, response) pairs.

    pix2pix pairs translate at constant size; srresnet pairs must be 4x apart.
    Deterministic for a fixed config seed.
    """
    if arch not in SURROGATE_ARCHS:
        raise ValueError(f"unknown surrogate architecture {arch!r}")
    if len(pairs) == 0:
        raise ValueError("training set is empty")
    in_shape = pairs.pairs[0][0].shape
    out_shape = pairs.pairs[0][1].shape
    if arch == "pix2pix" and in_shape != out_shape:
        raise ValueError(
            f"pix2pix needs same-shape pairs, got {in_shape} -> {out_shape}"
        )
    if arch == "srresnet" and (
        out_shape[0] != 4 * in_shape[0] or out_shape[1] != 4 * in_shape[1]
    ):
        raise ValueError(
            f"srresnet needs 4x pairs, got {in_shape} -> {out_shape}"
        )

    single_threaded_torch()
    side = in_shape[0]
    channels = in_shape[2]
    seed_torch(cfg.seed, "surrogate_train", arch)
    if arch == "pix2pix":
        gen = build_generator("unet", side, channels, cfg.preset, cfg.seed)
        disc = build_discriminator("patchgan", channels, cfg.preset, cfg.seed)
    else:
        gen = build_generator("srresnet", side, channels, cfg.preset, cfg.seed)
        disc = build_discriminator("sr_discriminator", channels, cfg.preset, cfg.seed)
    result = SurrogateTrainResult(generator=gen, discriminator=disc)

    opt_g = torch.optim.Adam(gen.parameters(), lr=cfg.learning_rate, betas=(0.5, 0.999))
    opt_d = torch.optim.Adam(disc.parameters(), lr=cfg.learning_rate, betas=(0.5, 0.999))

    inputs = pairs.inputs
    targets = pairs.targets
    last_good = _snapshot(gen, disc)
    for epoch in range(cfg.epochs):
        rng = rng_for(cfg.seed, "surrogate_order", str(epoch))
        order = rng.permutation(len(inputs))
        for step, (x_b, y_b) in enumerate(
            zip(
                _batches(inputs, order, cfg.batch_size),
                _batches(targets, order, cfg.batch_size),
            )
        ):
            opt_d.zero_grad()
            d_loss = discriminator_loss(disc, gen, y_b, x_b)
            d_loss.backward()
            opt_d.step()

            opt_g.zero_grad()
            g_loss = pix2pix_generator_loss(gen, disc, (x_b, y_b), loss_cfg)
            g_loss.backward()
            opt_g.step()

            rec = {
                "epoch": epoch,
                "step": step,
                "d_loss": d_loss.item(),
                "g_loss": g_loss.item(),
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


def proxy_ssim(surrogate, victim, inputs) -> float:
    """Mean SSIM between surrogate and victim outputs on shared inputs.

    The adversary's stand-in for ground-truth quality: it needs only query
    access to the victim.
    """
    inputs = list(inputs)
    if not inputs:
        raise ValueError("inputs must be non-empty")
    f = surrogate.apply if hasattr(surrogate, "apply") else surrogate
    g = victim.apply if hasattr(victim, "apply") else victim
    return float(np.mean([float(ssim(f(x), g(x))) for x in inputs]))

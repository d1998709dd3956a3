"""Checkpoint directories: one plain-text manifest plus a parameter blob."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import torch

from .discriminators import Discriminator, DiscriminatorSpec, build_discriminator
from .generators import Generator, GeneratorSpec, build_generator

FORMAT_VERSION = 1

MANIFEST_NAME = "manifest.json"
WEIGHTS_NAME = "weights.pt"


class CheckpointError(ValueError):
    """Missing, malformed, or incompatible checkpoint contents."""


def save_generator(directory: str | Path, gen: Generator) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": "generator",
        **dataclasses.asdict(gen.spec),
    }
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=1) + "\n")
    torch.save(gen.module.state_dict(), directory / WEIGHTS_NAME)
    return directory


def save_discriminator(directory: str | Path, disc: Discriminator) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": "discriminator",
        **dataclasses.asdict(disc.spec),
    }
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=1) + "\n")
    torch.save(disc.module.state_dict(), directory / WEIGHTS_NAME)
    return directory


def _read_manifest(directory: Path, expect_kind: str) -> dict:
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.is_file():
        raise CheckpointError(f"no manifest at {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"manifest is not valid JSON: {exc}") from exc
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint format_version {version!r} (expected {FORMAT_VERSION})"
        )
    if manifest.get("kind") != expect_kind:
        raise CheckpointError(
            f"checkpoint holds a {manifest.get('kind')!r}, expected {expect_kind!r}"
        )
    return manifest


def load_generator(directory: str | Path) -> Generator:
    directory = Path(directory)
    m = _read_manifest(directory, "generator")
    try:
        gen = build_generator(
            family=m["family"],
            image_side=int(m["input_shape"][0]),
            channels=int(m["input_shape"][2]),
            preset=m["preset"],
            seed=int(m["seed"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"manifest incompatible: {exc}") from exc
    expected = GeneratorSpec(
        family=m["family"],
        input_shape=tuple(m["input_shape"]),
        output_shape=tuple(m["output_shape"]),
        scale_factor=int(m["scale_factor"]),
        preset=m["preset"],
        seed=int(m["seed"]),
    )
    if gen.spec != expected:
        raise CheckpointError(f"rebuilt spec {gen.spec} does not match manifest")
    state = torch.load(directory / WEIGHTS_NAME, weights_only=True)
    gen.module.load_state_dict(state)
    gen.module.eval()
    return gen


def load_discriminator(directory: str | Path) -> Discriminator:
    directory = Path(directory)
    m = _read_manifest(directory, "discriminator")
    try:
        disc = build_discriminator(
            family=m["family"],
            channels=int(m["channels"]),
            preset=m["preset"],
            seed=int(m["seed"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"manifest incompatible: {exc}") from exc
    state = torch.load(directory / WEIGHTS_NAME, weights_only=True)
    disc.module.load_state_dict(state)
    disc.module.eval()
    return disc

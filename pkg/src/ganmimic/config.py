"""Experiment configuration: defaults, validation, and TOML loading.

Documented keys (all optional unless noted):

    task            one of monet | anime | superres | toy
    seed            integer, default 0
    budget_fraction real in (0, 1], default 1.0
    augmentations   list drawn from {flip, rotate5, cutout, contrast}
    repetitions     integer >= 1, default 5
    fractions       list of reals in (0, 1] for budget sweeps
    resolution      working image side in pixels (default 32 for toy, 256 otherwise)
    preset          tiny | small | full
    epochs, batch_size, learning_rate
                    trainer schedule knobs
    [paths]         data_root, workspace
    [service]       unit_price (string, currency per query), max_queries,
                    defense (none | watermark | poison), watermark_rate,
                    watermark_mode (hash | quota), trigger_kind
                    (blur | monochrome | text)

The service secret key is read from the GANMIMIC_SECRET environment variable,
never from the config file.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

TASKS = ("monet", "anime", "superres", "toy")
AUGMENTATIONS = ("flip", "rotate5", "cutout", "contrast")
PRESETS = ("tiny", "small", "full")

SECRET_ENV_VAR = "GANMIMIC_SECRET"


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class ServiceConfig:
    unit_price: str = "0.016"
    max_queries: int | None = None
    defense: str = "none"
    watermark_rate: float = 0.005
    watermark_mode: str = "hash"
    trigger_kind: str = "blur"
    max_payload_bytes: int = 8 * 1024 * 1024

    def __post_init__(self):
        if self.defense not in ("none", "watermark", "poison"):
            raise ConfigError(f"service.defense: unknown value {self.defense!r}")
        if self.watermark_mode not in ("hash", "quota"):
            raise ConfigError(
                f"service.watermark_mode: unknown value {self.watermark_mode!r}"
            )
        if self.trigger_kind not in ("blur", "monochrome", "text"):
            raise ConfigError(
                f"service.trigger_kind: unknown value {self.trigger_kind!r}"
            )
        if not (0.0 < self.watermark_rate < 1.0):
            raise ConfigError(
                f"service.watermark_rate: must be in (0, 1), got {self.watermark_rate}"
            )
        if self.max_queries is not None and self.max_queries < 0:
            raise ConfigError(
                f"service.max_queries: must be >= 0, got {self.max_queries}"
            )
        if self.max_payload_bytes < 1:
            raise ConfigError("service.max_payload_bytes: must be positive")


@dataclass(frozen=True)
class ExperimentConfig:
    task: str = "toy"
    seed: int = 0
    budget_fraction: float = 1.0
    augmentations: frozenset[str] = frozenset()
    repetitions: int = 5
    fractions: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    resolution: int | None = None
    preset: str = "tiny"
    epochs: int = 5
    batch_size: int = 16
    learning_rate: float = 2e-4
    data_root: Path | None = None
    workspace: Path = Path("workspace")
    service: ServiceConfig = field(default_factory=ServiceConfig)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigError(f"task: must be one of {TASKS}, got {self.task!r}")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions: must be >= 1, got {self.repetitions}")
        if not (0.0 < self.budget_fraction <= 1.0):
            raise ConfigError(
                f"budget_fraction: must be in (0, 1], got {self.budget_fraction}"
            )
        bad = set(self.augmentations) - set(AUGMENTATIONS)
        if bad:
            raise ConfigError(f"augmentations: unknown entries {sorted(bad)}")
        for f in self.fractions:
            if not (0.0 < f <= 1.0):
                raise ConfigError(f"fractions: entries must be in (0, 1], got {f}")
        if self.preset not in PRESETS:
            raise ConfigError(f"preset: must be one of {PRESETS}, got {self.preset!r}")
        if self.epochs < 0:
            raise ConfigError(f"epochs: must be >= 0, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size: must be >= 1, got {self.batch_size}")

    @property
    def image_side(self) -> int:
        if self.resolution is not None:
            return self.resolution
        return 32 if self.task == "toy" else 256

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs)


def _take(table: dict, key: str, typ, default, *, convert=None):
    if key not in table:
        return default
    val = table.pop(key)
    if convert is not None:
        try:
            return convert(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    if typ is float and isinstance(val, int):
        val = float(val)
    if not isinstance(val, typ):
        raise ConfigError(f"{key}: expected {typ.__name__}, got {type(val).__name__}")
    return val


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a TOML config file with field-level diagnostics."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file is not valid TOML: {exc}") from exc
    return config_from_dict(data)


def config_from_dict(data: dict) -> ExperimentConfig:
    data = dict(data)
    paths = dict(data.pop("paths", {}))
    service_tbl = dict(data.pop("service", {}))

    kwargs = dict(
        task=_take(data, "task", str, "toy"),
        seed=_take(data, "seed", int, 0),
        budget_fraction=_take(data, "budget_fraction", float, 1.0),
        augmentations=frozenset(
            _take(data, "augmentations", list, [], convert=lambda v: [str(x) for x in v])
        ),
        repetitions=_take(data, "repetitions", int, 5),
        fractions=tuple(
            _take(
                data,
                "fractions",
                list,
                [0.25, 0.5, 0.75, 1.0],
                convert=lambda v: [float(x) for x in v],
            )
        ),
        resolution=_take(data, "resolution", int, None),
        preset=_take(data, "preset", str, "tiny"),
        epochs=_take(data, "epochs", int, 5),
        batch_size=_take(data, "batch_size", int, 16),
        learning_rate=_take(data, "learning_rate", float, 2e-4),
    )
    if data:
        raise ConfigError(f"unknown config keys: {sorted(data)}")

    kwargs["data_root"] = _take(paths, "data_root", str, None, convert=Path)
    kwargs["workspace"] = _take(paths, "workspace", str, Path("workspace"), convert=Path)
    if paths:
        raise ConfigError(f"paths: unknown keys {sorted(paths)}")

    service = ServiceConfig(
        unit_price=str(_take(service_tbl, "unit_price", (str, float), "0.016", convert=str)),
        max_queries=_take(service_tbl, "max_queries", int, None),
        defense=_take(service_tbl, "defense", str, "none"),
        watermark_rate=_take(service_tbl, "watermark_rate", float, 0.005),
        watermark_mode=_take(service_tbl, "watermark_mode", str, "hash"),
        trigger_kind=_take(service_tbl, "trigger_kind", str, "blur"),
        max_payload_bytes=_take(service_tbl, "max_payload_bytes", int, 8 * 1024 * 1024),
    )
    if service_tbl:
        raise ConfigError(f"service: unknown keys {sorted(service_tbl)}")
    kwargs["service"] = service

    return ExperimentConfig(**kwargs)

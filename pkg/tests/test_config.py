import dataclasses

import pytest

from ganmimic.config import (
    AUGMENTATIONS,
    TASKS,
    ConfigError,
    ExperimentConfig,
    ServiceConfig,
    config_from_dict,
    load_config,
)


def test_defaults_valid():
    cfg = ExperimentConfig(task="toy", seed=0)
    assert cfg.preset == "tiny"
    assert cfg.fractions == (0.25, 0.5, 0.75, 1.0)
    assert cfg.service.unit_price == "0.016"


def test_known_tasks():
    assert set(TASKS) == {"monet", "anime", "superres", "toy"}
    for t in TASKS:
        ExperimentConfig(task=t, seed=1)


def test_invalid_task():
    with pytest.raises(ConfigError):
        ExperimentConfig(task="banana", seed=0)


def test_invalid_fraction():
    with pytest.raises(ConfigError):
        ExperimentConfig(task="toy", seed=0, budget_fraction=0.0)
    with pytest.raises(ConfigError):
        ExperimentConfig(task="toy", seed=0, budget_fraction=1.01)


def test_invalid_augmentation():
    with pytest.raises(ConfigError):
        ExperimentConfig(task="toy", seed=0, augmentations=frozenset({"sharpen"}))
    ExperimentConfig(task="toy", seed=0, augmentations=frozenset(AUGMENTATIONS))


def test_image_side_by_task():
    assert ExperimentConfig(task="toy", seed=0).image_side == 32
    assert ExperimentConfig(task="monet", seed=0).image_side == 256
    assert ExperimentConfig(task="monet", seed=0, resolution=64).image_side == 64


def test_frozen():
    cfg = ExperimentConfig(task="toy", seed=0)
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.seed = 5


def test_with_overrides():
    cfg = ExperimentConfig(task="toy", seed=0)
    new = cfg.with_overrides(seed=9, preset="small")
    assert new.seed == 9 and new.preset == "small"
    assert cfg.seed == 0


def test_service_defaults():
    svc = ServiceConfig()
    assert svc.defense == "none"
    assert svc.watermark_rate == 0.005
    assert svc.max_payload_bytes == 8 * 1024 * 1024


def test_service_invalid_defense():
    with pytest.raises(ConfigError):
        ServiceConfig(defense="firewall")


def test_config_from_dict_unknown_key():
    with pytest.raises(ConfigError, match="unknown"):
        config_from_dict({"task": "toy", "seed": 0, "bogus_key": 1})


def test_config_from_dict_nested_service():
    cfg = config_from_dict(
        {"task": "toy", "seed": 3, "service": {"defense": "watermark"}}
    )
    assert cfg.service.defense == "watermark"


def test_load_config_toml(tmp_path):
    p = tmp_path / "exp.toml"
    p.write_text(
        'task = "superres"\nseed = 11\nepochs = 2\n\n'
        '[service]\ndefense = "poison"\nmax_queries = 500\n'
    )
    cfg = load_config(p)
    assert cfg.task == "superres"
    assert cfg.seed == 11
    assert cfg.epochs == 2
    assert cfg.service.defense == "poison"
    assert cfg.service.max_queries == 500


def test_load_config_bad_toml(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("task = [unclosed")
    with pytest.raises(ConfigError):
        load_config(p)

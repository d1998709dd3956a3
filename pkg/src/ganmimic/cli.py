"""Command-line entry points for training, serving, attacking, and reporting.

Every command resolves its configuration from an optional TOML file plus
flag overrides, confines side effects to the workspace directory, and writes
a manifest there recording the config snapshot, seed, library versions, and
step timings.
"""

from __future__ import annotations

import dataclasses
import json
import os
import platform
import statistics
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .config import (
    PRESETS,
    SECRET_ENV_VAR,
    TASKS,
    ConfigError,
    ExperimentConfig,
    load_config,
)
from .datasets import load_dataset
from .extraction import SURROGATE_ARCHS, harvest, train_surrogate
from .images import load_image
from .metrics import (
    MetricReport,
    WindowConfig,
    fid,
    make_extractor,
    psnr,
    ssim,
    summarize_scores,
)
from .reference import EXPERIMENT_LABELS
from .reporting import (
    SWEEP_FILENAME,
    append_metric_report,
    emit_report,
    render_budget_curve,
    write_budget_curve,
)
from .service import BlackBoxService, BudgetPolicy
from .stats import DEFAULT_ALPHA, cohens_d, ingest_scores, tost, welch_t
from .sweep import budget_sweep, load_sweep_store, summarize_sweep
from .toydata import TILTS, make_sr_dataset, make_style_dataset, make_style_inputs, toy_style

STYLE_TASKS = ("monet", "anime", "toy")

_WC = WindowConfig()


def _resolve_config(config_path, **overrides) -> ExperimentConfig:
    try:
        cfg = load_config(config_path) if config_path else ExperimentConfig()
        return cfg.with_overrides(**overrides)
    except ConfigError as exc:
        raise click.UsageError(str(exc))


def _common_options(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(), default=None,
                     help="TOML config file."),
        click.option("--seed", type=int, default=None, help="Override the seed."),
        click.option("--workspace", type=click.Path(), default=None,
                     help="Directory all artifacts go under."),
        click.option("--task", type=click.Choice(TASKS), default=None),
        click.option("--preset", type=click.Choice(PRESETS), default=None),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _config_snapshot(cfg: ExperimentConfig) -> dict:
    snap = dataclasses.asdict(cfg)
    snap["augmentations"] = sorted(cfg.augmentations)
    snap["data_root"] = str(cfg.data_root) if cfg.data_root else None
    snap["workspace"] = str(cfg.workspace)
    return snap


def _write_manifest(cfg: ExperimentConfig, command: str, artifacts: dict, timings: dict) -> Path:
    import torch

    ws = Path(cfg.workspace)
    manifest_dir = ws / "manifests"
    manifest_dir.mkdir(parents=True, exist_ok=True)
    rel_artifacts = {}
    for name, p in artifacts.items():
        p = Path(p)
        try:
            rel_artifacts[name] = str(p.relative_to(ws))
        except ValueError:
            rel_artifacts[name] = str(p)
    manifest = {
        "command": command,
        "config": _config_snapshot(cfg),
        "seed": cfg.seed,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "torch": torch.__version__,
            "ganmimic": __version__,
        },
        "artifacts": rel_artifacts,
        "timings": {k: round(float(v), 3) for k, v in timings.items()},
    }
    path = manifest_dir / f"{command}.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _secret(required: bool = True) -> str:
    key = os.environ.get(SECRET_ENV_VAR, "")
    if required and not key:
        raise click.UsageError(f"set {SECRET_ENV_VAR} to the service secret key")
    return key


def _victim_dir(cfg) -> Path:
    return Path(cfg.workspace) / "victim" / cfg.task


def _style_training_data(cfg, n_train: int):
    if cfg.task == "toy":
        return make_style_dataset(n_train, side=cfg.image_side, seed=cfg.seed)
    if cfg.data_root is None:
        raise click.UsageError(
            f"task {cfg.task!r} needs paths.data_root pointing at an unpaired "
            "image layout; the synthetic desk-scale pipeline is task 'toy'"
        )
    return load_dataset(Path(cfg.data_root) / cfg.task, layout="unpaired")


def _sr_training_data(cfg, n_train: int):
    if cfg.data_root is None:
        return make_sr_dataset(n_train, hr_side=cfg.image_side, seed=cfg.seed)
    return load_dataset(Path(cfg.data_root) / cfg.task, layout="paired")


def _load_victim_generator(cfg):
    from .models import load_generator

    name = "g_ab" if cfg.task in STYLE_TASKS else "generator"
    directory = _victim_dir(cfg) / name
    if not directory.is_dir():
        raise click.ClickException(
            f"no trained victim under {directory}; run train-victim first"
        )
    return load_generator(directory)


def _load_victim_discriminator(cfg):
    from .models import load_discriminator

    name = "d_b" if cfg.task in STYLE_TASKS else "discriminator"
    directory = _victim_dir(cfg) / name
    if not directory.is_dir():
        raise click.ClickException(
            f"no trained victim discriminator under {directory}; run train-victim first"
        )
    return load_discriminator(directory)


def _build_defense_hook(cfg):
    if cfg.service.defense == "none":
        return None
    if cfg.service.defense == "watermark":
        from .defenses import WatermarkHook

        return WatermarkHook(
            _secret(),
            rate=cfg.service.watermark_rate,
            mode=cfg.service.watermark_mode,
            trigger_kind=cfg.service.trigger_kind,
        )
    from .defenses import PoisonHook

    return PoisonHook(_load_victim_discriminator(cfg))


def _build_service(cfg, generator, ledger_path=None) -> BlackBoxService:
    policy = BudgetPolicy(
        max_queries=cfg.service.max_queries, unit_price=cfg.service.unit_price
    )
    return BlackBoxService(
        generator,
        policy=policy,
        ledger_path=ledger_path,
        defense_hook=_build_defense_hook(cfg),
    )


def _query_inputs(cfg, n: int, tag: str, tilt: str = "both"):
    if cfg.task in STYLE_TASKS:
        return make_style_inputs(n, side=cfg.image_side, seed=cfg.seed, tag=tag, tilt=tilt)
    ds = make_sr_dataset(n, hr_side=cfg.image_side, seed=cfg.seed, split=tag)
    return [lr for lr, _ in ds.pairs]


def _results_dir(cfg) -> Path:
    return Path(cfg.workspace) / "results"


def _report_dir(cfg) -> Path:
    return Path(cfg.workspace) / "report"


@click.group()
@click.version_option(__version__)
def main():
    """Model-extraction benchmark for image-translation services."""


@main.command("train-victim")
@_common_options
@click.option("--n-train", type=int, default=256, show_default=True,
              help="Synthetic training images per domain.")
@click.option("--epochs", type=int, default=None, help="Override training epochs.")
def train_victim(config_path, seed, workspace, task, preset, n_train, epochs):
    """Train the victim model for the configured task."""
    from .victims import TrainingDivergedError, train_sr_victim, train_unpaired_victim

    cfg = _resolve_config(config_path, seed=seed, workspace=workspace, task=task,
                          preset=preset, epochs=epochs)
    from .models import save_discriminator, save_generator

    out = _victim_dir(cfg)
    log_path = out / "train_log.jsonl"
    t0 = time.monotonic()
    try:
        if cfg.task in STYLE_TASKS:
            data = _style_training_data(cfg, n_train)
            result = train_unpaired_victim(data, cfg, log_path=log_path)
            artifacts = {
                "g_ab": save_generator(out / "g_ab", result.g_ab),
                "g_ba": save_generator(out / "g_ba", result.g_ba),
                "d_a": save_discriminator(out / "d_a", result.d_a),
                "d_b": save_discriminator(out / "d_b", result.d_b),
            }
        else:
            pairs = _sr_training_data(cfg, n_train)
            result = train_sr_victim(pairs, cfg, log_path=log_path)
            artifacts = {
                "generator": save_generator(out / "generator", result.generator),
                "discriminator": save_discriminator(out / "discriminator", result.discriminator),
            }
    except TrainingDivergedError as exc:
        raise click.ClickException(f"training diverged: {exc}")
    train_s = time.monotonic() - t0
    artifacts["train_log"] = log_path
    manifest = _write_manifest(cfg, "train-victim", artifacts, {"train_s": train_s})
    click.echo(f"trained {cfg.task} victim ({cfg.preset}, {cfg.epochs} epochs) in {train_s:.1f}s")
    click.echo(f"weights under {out}; manifest {manifest}")


@main.command()
@_common_options
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--dry-run", is_flag=True, help="Construct the app, print routes, exit.")
def serve(config_path, seed, workspace, task, preset, host, port, dry_run):
    """Serve the trained victim over HTTP behind the query API."""
    from .webapi import create_app

    cfg = _resolve_config(config_path, seed=seed, workspace=workspace, task=task,
                          preset=preset)
    generator = _load_victim_generator(cfg)
    ledger = Path(cfg.workspace) / "ledgers" / f"serve-{cfg.task}.jsonl"
    service = _build_service(cfg, generator, ledger_path=ledger)
    app = create_app({cfg.task: service}, max_payload_bytes=cfg.service.max_payload_bytes)
    _write_manifest(cfg, "serve", {"ledger": ledger}, {})
    if dry_run:
        for route in app.routes:
            methods = ",".join(sorted(getattr(route, "methods", ()) or ()))
            click.echo(f"{methods} {route.path}")
        service.close()
        return
    import uvicorn

    click.echo(f"serving {cfg.task} on http://{host}:{port} (defense: {cfg.service.defense})")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("harvest")
@_common_options
@click.option("--queries", type=int, default=2000, show_default=True)
@click.option("--client", "client_id", default="attacker", show_default=True)
@click.option("--tilt", type=click.Choice(TILTS), default="both", show_default=True,
              help="Orientation coverage of the style query pool.")
@click.option("--name", default="harvest", show_default=True,
              help="Output dataset name under the workspace.")
def harvest_cmd(config_path, seed, workspace, task, preset, queries, client_id, tilt, name):
    """Query the victim service and persist the (input, output) pairs."""
    from .service import BudgetExhaustedError

    cfg = _resolve_config(config_path, seed=seed, workspace=workspace, task=task,
                          preset=preset)
    generator = _load_victim_generator(cfg)
    ledger = Path(cfg.workspace) / "ledgers" / f"{name}.jsonl"
    out_dir = Path(cfg.workspace) / "harvest" / name
    inputs = _query_inputs(cfg, queries, tag=name, tilt=tilt)
    t0 = time.monotonic()
    with _build_service(cfg, generator, ledger_path=ledger) as service:
        try:
            pairs = harvest(service, client_id, inputs, out_dir=out_dir)
        except BudgetExhaustedError as exc:
            partial = getattr(exc, "partial", None)
            kept = len(partial) if partial is not None else 0
            raise click.ClickException(
                f"budget exhausted after {kept} pairs (partial set kept at {out_dir})"
            )
    harvest_s = time.monotonic() - t0
    _write_manifest(cfg, "harvest", {"pairs": out_dir, "ledger": ledger},
                    {"harvest_s": harvest_s})
    click.echo(f"harvested {len(pairs)} pairs into {out_dir} ({harvest_s:.1f}s)")


def _surrogate_arch(cfg) -> str:
    return "pix2pix" if cfg.task in STYLE_TASKS else "srresnet"


def _style_truth(cfg):
    return toy_style if cfg.task == "toy" else None


def _heldout(cfg, n: int):
    if cfg.task in STYLE_TASKS:
        return make_style_inputs(n, side=cfg.image_side, seed=cfg.seed + 2, tag="heldout")
    ds = make_sr_dataset(n, hr_side=cfg.image_side, seed=cfg.seed + 2, split="heldout")
    return ds


def _apply(model, x):
    return model.apply(x) if hasattr(model, "apply") else model(x)


def _mean_ssim(outputs_a, outputs_b):
    return statistics.fmean(ssim(a, b, _WC) for a, b in zip(outputs_a, outputs_b))


def _style_metric_rows(cfg, victim, surrogate, heldout_inputs):
    """A/B/C rows for a style task: SSIM against each target plus frozen-
    feature FID between the output sets."""
    v_out = [_apply(victim, x) for x in heldout_inputs]
    s_out = [_apply(surrogate, x) for x in heldout_inputs]
    rows = []
    test_set = "toy heldout"
    truth = _style_truth(cfg)
    extractor = make_extractor("frozen_random", seed=cfg.seed, input_size=cfg.image_side)
    if truth is not None:
        t_out = [truth(x) for x in heldout_inputs]
        comparisons = (
            ("victim_vs_truth", v_out, t_out),
            ("surrogate_vs_victim", s_out, v_out),
            ("surrogate_vs_truth", s_out, t_out),
        )
    else:
        comparisons = (("surrogate_vs_victim", s_out, v_out),)
    for experiment, got, want in comparisons:
        label = EXPERIMENT_LABELS[experiment]
        rows.append(
            summarize_scores(
                [ssim(a, b, _WC) for a, b in zip(got, want)],
                task=cfg.task, test_set=test_set, comparison=label, metric="ssim",
            )
        )
        rows.append(
            MetricReport(task=cfg.task, test_set=test_set, comparison=label,
                         metric="fid", mean=fid(got, want, extractor), std=0.0,
                         n_runs=1)
        )
    return rows


def _sr_metric_rows(cfg, victim, surrogate, heldout_pairs):
    rows = []
    test_set = "toy heldout"
    inputs = [lr for lr, _ in heldout_pairs.pairs]
    truth_out = [hr for _, hr in heldout_pairs.pairs]
    v_out = [_apply(victim, x) for x in inputs]
    s_out = [_apply(surrogate, x) for x in inputs]
    for experiment, got, want in (
        ("victim_vs_truth", v_out, truth_out),
        ("surrogate_vs_victim", s_out, v_out),
        ("surrogate_vs_truth", s_out, truth_out),
    ):
        label = EXPERIMENT_LABELS[experiment]
        rows.append(
            summarize_scores(
                [ssim(a, b, _WC) for a, b in zip(got, want)],
                task=cfg.task, test_set=test_set, comparison=label, metric="ssim",
            )
        )
        values = [psnr(b, a) for a, b in zip(got, want)]
        if all(np.isfinite(v) for v in values):
            rows.append(
                summarize_scores(values, task=cfg.task, test_set=test_set,
                                 comparison=label, metric="psnr")
            )
    return rows


@main.command()
@_common_options
@click.option("--queries", type=int, default=2000, show_default=True)
@click.option("--arch", type=click.Choice(SURROGATE_ARCHS), default=None,
              help="Surrogate architecture (defaults to the task's).")
@click.option("--heldout", "n_heldout", type=int, default=64, show_default=True)
@click.option("--pairs", "pairs_dir", type=click.Path(), default=None,
              help="Reuse an existing harvested dataset instead of querying.")
def extract(config_path, seed, workspace, task, preset, queries, arch, n_heldout, pairs_dir):
    """Run the extraction attack end to end and record A/B/C metric rows."""
    from .models import save_discriminator, save_generator

    cfg = _resolve_config(config_path, seed=seed, workspace=workspace, task=task,
                          preset=preset)
    victim = _load_victim_generator(cfg)
    timings = {}

    t0 = time.monotonic()
    if pairs_dir is not None:
        pairs = load_dataset(pairs_dir, layout="paired")
    else:
        ledger = Path(cfg.workspace) / "ledgers" / "extract.jsonl"
        with _build_service(cfg, victim, ledger_path=ledger) as service:
            pairs = harvest(service, "attacker", _query_inputs(cfg, queries, tag="extract"),
                            out_dir=Path(cfg.workspace) / "harvest" / "extract")
    timings["harvest_s"] = time.monotonic() - t0

    t0 = time.monotonic()
    arch = arch or _surrogate_arch(cfg)
    out = Path(cfg.workspace) / "surrogate" / cfg.task
    trained = train_surrogate(pairs, arch, cfg, log_path=out / "train_log.jsonl")
    timings["train_s"] = time.monotonic() - t0

    t0 = time.monotonic()
    held = _heldout(cfg, n_heldout)
    if cfg.task in STYLE_TASKS:
        rows = _style_metric_rows(cfg, victim, trained.generator, held)
    else:
        rows = _sr_metric_rows(cfg, victim, trained.generator, held)
    store = _results_dir(cfg)
    for row in rows:
        append_metric_report(store, row)
    timings["evaluate_s"] = time.monotonic() - t0

    artifacts = {
        "generator": save_generator(out / "generator", trained.generator),
        "discriminator": save_discriminator(out / "discriminator", trained.discriminator),
        "metrics": store / "metrics.jsonl",
    }
    _write_manifest(cfg, "extract", artifacts, timings)
    for row in rows:
        click.echo(
            f"{row.comparison} {row.metric}: {row.mean:.4f} "
            f"(std {row.std:.4f}, n {row.n_runs})"
        )


def _load_image_dir(path: Path):
    files = sorted(p for p in Path(path).iterdir() if p.suffix.lower() == ".png")
    if not files:
        raise click.ClickException(f"no .png files under {path}")
    return [load_image(p) for p in files]


@main.command()
@_common_options
@click.option("--set-a", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--set-b", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--test-set", default="custom", show_default=True)
@click.option("--comparison", default="(B) surrogate-vs-victim", show_default=True)
def evaluate(config_path, seed, workspace, task, preset, set_a, set_b, test_set, comparison):
    """Compare two image directories with FID (plus SSIM/PSNR when paired)."""
    cfg = _resolve_config(config_path, seed=seed, workspace=workspace, task=task,
                          preset=preset)
    images_a = _load_image_dir(set_a)
    images_b = _load_image_dir(set_b)
    side = images_a[0].shape[0]
    extractor = make_extractor("frozen_random", seed=cfg.seed, input_size=side)
    rows = [
        MetricReport(task=cfg.task, test_set=test_set, comparison=comparison,
                     metric="fid", mean=fid(images_a, images_b, extractor),
                     std=0.0, n_runs=1)
    ]
    if len(images_a) == len(images_b) and images_a[0].shape == images_b[0].shape:
        rows.append(
            summarize_scores(
                [ssim(a, b, _WC) for a, b in zip(images_a, images_b)],
                task=cfg.task, test_set=test_set, comparison=comparison, metric="ssim",
            )
        )
        values = [psnr(a, b) for a, b in zip(images_a, images_b)]
        if all(np.isfinite(v) for v in values):
            rows.append(
                summarize_scores(values, task=cfg.task, test_set=test_set,
                                 comparison=comparison, metric="psnr")
            )
        else:
            click.echo("psnr: infinite (identical images), row skipped")
    store = _results_dir(cfg)
    for row in rows:
        append_metric_report(store, row)
        click.echo(f"{row.comparison} {row.metric}: {row.mean:.4f}")
    _write_manifest(cfg, "evaluate", {"metrics": store / "metrics.jsonl"}, {})


def _parse_fractions(text):
    if text is None:
        return None
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise click.UsageError(f"--fractions must be comma-separated reals, got {text!r}")
    return values or None


@main.command("sweep")
@_common_options
@click.option("--fractions", default=None,
              help="Comma-separated dataset fractions, e.g. 0.25,0.5,0.75,1.0.")
@click.option("--repetitions", type=int, default=None)
@click.option("--queries", type=int, default=2000, show_default=True)
@click.option("--augment", "augments", multiple=True,
              help="Augmentation op applied in every cell (repeatable).")
@click.option("--pairs", "pairs_dir", type=click.Path(), default=None)
def sweep_cmd(config_path, seed, workspace, task, preset, fractions, repetitions,
              queries, augments, pairs_dir):
    """Retrain the surrogate across budget fractions and emit the curve."""
    cfg = _resolve_config(
        config_path, seed=seed, workspace=workspace, task=task, preset=preset,
        fractions=_parse_fractions(fractions), repetitions=repetitions,
        augmentations=frozenset(augments) if augments else None,
    )
    victim = _load_victim_generator(cfg)
    if pairs_dir is not None:
        pairs = load_dataset(pairs_dir, layout="paired")
    else:
        with _build_service(cfg, victim) as service:
            pairs = harvest(service, "attacker", _query_inputs(cfg, queries, tag="sweep"))
    held = _heldout(cfg, 64)
    if cfg.task not in STYLE_TASKS:
        held = [lr for lr, _ in held.pairs]
    store_path = _results_dir(cfg) / SWEEP_FILENAME
    t0 = time.monotonic()
    cells = budget_sweep(
        pairs, victim, cfg, held,
        arch=_surrogate_arch(cfg), truth=_style_truth(cfg), store_path=store_path,
    )
    sweep_s = time.monotonic() - t0
    report_dir = _report_dir(cfg)
    report_dir.mkdir(parents=True, exist_ok=True)
    curve = write_budget_curve(cells, report_dir / "budget_curve.csv")
    artifacts = {"store": store_path, "curve": curve}
    png = render_budget_curve(cells, report_dir / "budget_curve.png")
    if png is not None:
        artifacts["curve_png"] = png
    _write_manifest(cfg, "sweep", artifacts, {"sweep_s": sweep_s})
    errors = [c for c in cells if c.status == "error"]
    for row in summarize_sweep(cells):
        augs = "+".join(row["augmentations"]) or "none"
        click.echo(
            f"fraction {row['fraction']:g} [{augs}]: "
            f"{row['mean']:.4f} ± {row['std']:.4f} (n {row['n']})"
        )
    if errors:
        click.echo(f"{len(errors)} cell(s) failed; first: {errors[0].error}")


@main.command("augment-ablation")
@_common_options
@click.option("--fraction", type=float, default=0.25, show_default=True,
              help="Pre-plateau dataset fraction to ablate at.")
@click.option("--ops", default="flip,contrast", show_default=True,
              help="Comma-separated augmentation ops to compare to baseline.")
@click.option("--repetitions", type=int, default=None)
@click.option("--queries", type=int, default=2000, show_default=True)
@click.option("--tilt", type=click.Choice(TILTS), default="pos", show_default=True)
@click.option("--pairs", "pairs_dir", type=click.Path(), default=None)
def augment_ablation(config_path, seed, workspace, task, preset, fraction, ops,
                     repetitions, queries, tilt, pairs_dir):
    """Train with and without each augmentation at one fraction."""
    cfg = _resolve_config(config_path, seed=seed, workspace=workspace, task=task,
                          preset=preset, repetitions=repetitions,
                          fractions=(fraction,))
    victim = _load_victim_generator(cfg)
    if pairs_dir is not None:
        pairs = load_dataset(pairs_dir, layout="paired")
    else:
        with _build_service(cfg, victim) as service:
            pairs = harvest(
                service, "attacker",
                _query_inputs(cfg, queries, tag="ablation", tilt=tilt),
            )
    held = _heldout(cfg, 64)
    if cfg.task not in STYLE_TASKS:
        held = [lr for lr, _ in held.pairs]
    store_path = _results_dir(cfg) / SWEEP_FILENAME
    op_list = [op for op in (part.strip() for part in ops.split(",")) if op]
    settings = [frozenset()] + [frozenset({op}) for op in op_list]
    t0 = time.monotonic()
    all_cells = []
    for augs in settings:
        run_cfg = cfg.with_overrides(augmentations=augs)
        all_cells.extend(
            budget_sweep(pairs, victim, run_cfg, held, arch=_surrogate_arch(cfg),
                         truth=_style_truth(cfg), store_path=store_path)
        )
    ablation_s = time.monotonic() - t0
    report_dir = _report_dir(cfg)
    report_dir.mkdir(parents=True, exist_ok=True)
    table = write_budget_curve(all_cells, report_dir / "ablation.csv")
    _write_manifest(cfg, "augment-ablation", {"store": store_path, "table": table},
                    {"ablation_s": ablation_s})
    baseline = None
    for row in summarize_sweep(all_cells):
        augs = "+".join(row["augmentations"]) or "none"
        if augs == "none":
            baseline = row["median"]
        click.echo(f"{augs}: median {row['median']:.4f} (n {row['n']})")
    if baseline is not None:
        click.echo(f"baseline median {baseline:.4f}")


@main.command()
@_common_options
@click.option("--defense", type=click.Choice(["watermark", "poison"]), default=None,
              help="Override the configured defense.")
@click.option("--queries", type=int, default=400, show_default=True)
def defend(config_path, seed, workspace, task, preset, defense, queries):
    """Exercise the configured defense against a probe client and report."""
    from dataclasses import replace as dc_replace

    cfg = _resolve_config(config_path, seed=seed, workspace=workspace, task=task,
                          preset=preset)
    if defense is not None:
        cfg = cfg.with_overrides(service=dc_replace(cfg.service, defense=defense))
    if cfg.service.defense == "none":
        raise click.UsageError("pick a defense via --defense or service.defense")
    victim = _load_victim_generator(cfg)
    out_dir = Path(cfg.workspace) / "defense" / cfg.service.defense
    report: dict = {"defense": cfg.service.defense, "queries": queries}
    t0 = time.monotonic()
    if cfg.service.defense == "watermark":
        from .defenses import apply_trigger, verify_watermark
        from .images import quantize

        hook = _build_defense_hook(cfg)
        policy = BudgetPolicy(max_queries=cfg.service.max_queries,
                              unit_price=cfg.service.unit_price)
        with BlackBoxService(victim, policy=policy, defense_hook=hook) as service:
            for x in _query_inputs(cfg, queries, tag="defend"):
                service.transform("probe", x)
        store = hook.save_trigger_store(out_dir / "trigger_store")
        marked = len(hook.trigger_set())
        report.update(mode=cfg.service.watermark_mode, marked=marked,
                      trigger_store=str(store))
        if marked:
            # self-check replays triggers through the marking pipeline: the
            # stored pairs must reproduce what a client of the defended
            # service received, not the raw generator output
            def marked_pipeline(x):
                return quantize(apply_trigger(victim.apply(x), hook.trigger_kind))

            verification = verify_watermark(marked_pipeline, hook.trigger_set())
            report.update(match_rate=verification.match_rate,
                          decision=verification.decision)
            click.echo(
                f"marked {marked}/{queries}; self-verification match rate "
                f"{verification.match_rate:.2f} -> "
                f"{'watermarked' if verification.decision else 'not watermarked'}"
            )
        else:
            click.echo(f"marked 0/{queries} queries; no trigger pairs to verify")
    else:
        from .defenses import decision_flip_rate, pgd_perturb_batch

        disc = _load_victim_discriminator(cfg)
        inputs = _query_inputs(cfg, min(queries, 64), tag="defend")
        outputs = np.stack([_apply(victim, x) for x in inputs])
        perturbed = pgd_perturb_batch(outputs, disc)
        linf = float(np.abs(perturbed - outputs).max())
        flip = decision_flip_rate(disc, outputs, perturbed)
        report.update(linf=linf, flip_rate=flip)
        out_dir.mkdir(parents=True, exist_ok=True)
        click.echo(f"perturbed {len(inputs)} outputs: linf {linf:.4f}, "
                   f"decision flip rate {flip:.2f}")
    report["duration_s"] = round(time.monotonic() - t0, 3)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write_manifest(cfg, "defend", {"report": report_path},
                    {"defend_s": report["duration_s"]})


@main.command("stats")
@_common_options
@click.option("--scores", "scores_path", required=True, type=click.Path(exists=True),
              help="Delimited score file: task, model, participant_id, item_id, score.")
@click.option("--d-bound", type=float, default=0.5, show_default=True,
              help="Equivalence margin in pooled standard deviations.")
@click.option("--alpha", type=float, default=DEFAULT_ALPHA, show_default=True)
def stats_cmd(config_path, seed, workspace, task, preset, scores_path, d_bound, alpha):
    """Welch's t, Cohen's d, and equivalence tests over a user-study file."""
    from .stats import ScoreFileError

    cfg = _resolve_config(config_path, seed=seed, workspace=workspace, task=task,
                          preset=preset)
    try:
        samples = ingest_scores(scores_path)
    except ScoreFileError as exc:
        raise click.ClickException(str(exc))
    by_task: dict = {}
    for sample in samples:
        by_task.setdefault(sample.task_tag, {})[sample.model_tag] = sample
    if not by_task:
        raise click.ClickException(f"no scores found in {scores_path}")
    results = {}
    for task_tag, models in sorted(by_task.items()):
        if set(models) != {"victim", "surrogate"}:
            raise click.ClickException(
                f"task {task_tag!r} needs scores for both victim and surrogate"
            )
        a = models["victim"].scores
        b = models["surrogate"].scores
        t_res = welch_t(a, b, alpha=alpha)
        tost_res = tost(a, b, d_bound=d_bound, alpha=alpha)
        d = cohens_d(a, b)
        results[task_tag] = {
            "welch": dataclasses.asdict(t_res),
            "cohens_d": d,
            "tost": dataclasses.asdict(tost_res),
        }
        verdict = "different" if t_res.significant else "not significantly different"
        equiv = "equivalent" if tost_res.reject_nonequivalence else "not shown equivalent"
        click.echo(
            f"{task_tag}: victim {t_res.mean_a:.2f}±{t_res.std_a:.2f} vs "
            f"surrogate {t_res.mean_b:.2f}±{t_res.std_b:.2f}; "
            f"p={t_res.p_value:.3g} ({verdict}), d={d:.2f}, "
            f"TOST p={tost_res.p_tost:.3g} ({equiv})"
        )
    report_dir = _report_dir(cfg)
    report_dir.mkdir(parents=True, exist_ok=True)
    stats_path = report_dir / "stats.json"
    stats_path.write_text(json.dumps(results, indent=2, sort_keys=True) + "\n")
    _write_manifest(cfg, "stats", {"stats": stats_path}, {})


@main.command()
@_common_options
def report(config_path, seed, workspace, task, preset):
    """Render tables and plots from the workspace results store."""
    cfg = _resolve_config(config_path, seed=seed, workspace=workspace, task=task,
                          preset=preset)
    try:
        artifacts = emit_report(_results_dir(cfg), _report_dir(cfg))
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _write_manifest(cfg, "report", dict(artifacts), {})
    for name, path in sorted(artifacts.items()):
        click.echo(f"{name}: {path}")


if __name__ == "__main__":
    main()

"""End-to-end command-line workflows on a miniature toy setup."""

import csv
import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from ganmimic.cli import main
from ganmimic.config import SECRET_ENV_VAR
from ganmimic.images import save_image


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def style_ws(tmp_path_factory, runner):
    """A workspace with a trained toy victim and one harvested dataset."""
    root = tmp_path_factory.mktemp("cli-style")
    ws = root / "ws"
    cfg_file = root / "exp.toml"
    cfg_file.write_text(
        "\n".join(
            [
                'task = "toy"',
                "seed = 3",
                "epochs = 1",
                "batch_size = 4",
                "resolution = 16",
                'preset = "tiny"',
                "repetitions = 1",
                "[paths]",
                f'workspace = "{ws}"',
            ]
        )
        + "\n"
    )
    result = runner.invoke(main, ["train-victim", "--config", str(cfg_file), "--n-train", "8"])
    assert result.exit_code == 0, result.output
    result = runner.invoke(
        main, ["harvest", "--config", str(cfg_file), "--queries", "24", "--name", "h24"]
    )
    assert result.exit_code == 0, result.output
    return {"cfg": str(cfg_file), "ws": ws}


class TestBasics:
    def test_help(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for name in ("train-victim", "serve", "harvest", "extract", "evaluate",
                     "sweep", "augment-ablation", "defend", "stats", "report"):
            assert name in result.output

    def test_unknown_subcommand(self, runner):
        result = runner.invoke(main, ["transmogrify"])
        assert result.exit_code != 0
        assert "No such command" in result.output

    def test_invalid_config_names_field(self, runner, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("repetitions = 0\n")
        result = runner.invoke(main, ["report", "--config", str(bad)])
        assert result.exit_code != 0
        assert "repetitions" in result.output


class TestTrainVictim:
    def test_artifacts_and_manifest(self, style_ws):
        ws = style_ws["ws"]
        for name in ("g_ab", "g_ba", "d_a", "d_b"):
            assert (ws / "victim" / "toy" / name / "weights.pt").is_file()
        assert (ws / "victim" / "toy" / "train_log.jsonl").is_file()
        manifest = json.loads((ws / "manifests" / "train-victim.json").read_text())
        assert manifest["command"] == "train-victim"
        assert manifest["seed"] == 3
        assert manifest["config"]["task"] == "toy"
        assert set(manifest["versions"]) == {"python", "numpy", "torch", "ganmimic"}
        assert "train_s" in manifest["timings"]

    def test_missing_victim_is_actionable(self, runner, tmp_path):
        result = runner.invoke(
            main, ["harvest", "--workspace", str(tmp_path / "empty"), "--queries", "2"]
        )
        assert result.exit_code != 0
        assert "train-victim" in result.output


class TestHarvest:
    def test_pairs_ledger_provenance(self, style_ws):
        ws = style_ws["ws"]
        out = ws / "harvest" / "h24"
        prov = json.loads((out / "provenance.json").read_text())
        assert len(prov["pairs"]) == 24
        ledger_lines = (ws / "ledgers" / "h24.jsonl").read_text().splitlines()
        assert len(ledger_lines) == 24


class TestServe:
    def test_dry_run_lists_routes(self, style_ws, runner):
        result = runner.invoke(main, ["serve", "--config", style_ws["cfg"], "--dry-run"])
        assert result.exit_code == 0, result.output
        assert "/v1/transform" in result.output
        assert "/v1/health" in result.output


class TestExtract:
    def test_reuse_pairs_and_metric_rows(self, style_ws, runner):
        ws = style_ws["ws"]
        result = runner.invoke(
            main,
            ["extract", "--config", style_ws["cfg"], "--pairs",
             str(ws / "harvest" / "h24"), "--heldout", "4"],
        )
        assert result.exit_code == 0, result.output
        assert "(A) victim-vs-truth" in result.output
        assert "(B) surrogate-vs-victim" in result.output
        assert "(C) surrogate-vs-truth" in result.output
        lines = (ws / "results" / "metrics.jsonl").read_text().splitlines()
        rows = [json.loads(line) for line in lines]
        comparisons = {r["comparison"] for r in rows}
        assert comparisons == {
            "(A) victim-vs-truth",
            "(B) surrogate-vs-victim",
            "(C) surrogate-vs-truth",
        }
        assert {r["metric"] for r in rows} == {"ssim", "fid"}
        assert (ws / "surrogate" / "toy" / "generator" / "weights.pt").is_file()


class TestEvaluate:
    def test_identical_sets_give_zero_fid(self, style_ws, runner, tmp_path):
        rng = np.random.default_rng(0)
        d = tmp_path / "imgs"
        d.mkdir()
        for i in range(6):
            save_image(d / f"{i}.png", rng.random((16, 16, 3)).astype(np.float32))
        result = runner.invoke(
            main,
            ["evaluate", "--config", style_ws["cfg"], "--set-a", str(d),
             "--set-b", str(d), "--test-set", "selfcheck"],
        )
        assert result.exit_code == 0, result.output
        fid_line = next(line for line in result.output.splitlines() if " fid: " in line)
        assert float(fid_line.rsplit(" ", 1)[1]) == pytest.approx(0.0, abs=1e-6)
        assert "infinite" in result.output  # identical images skip the psnr row


class TestSweep:
    def test_curve_and_resume(self, style_ws, runner):
        ws = style_ws["ws"]
        args = [
            "sweep", "--config", style_ws["cfg"], "--pairs",
            str(ws / "harvest" / "h24"), "--fractions", "0.5,1.0",
            "--repetitions", "1",
        ]
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        curve_rows = list(csv.reader(open(ws / "report" / "budget_curve.csv")))
        fractions = [row[0] for row in curve_rows[1:]]
        assert fractions == ["0.5", "1"]
        store_size = len((ws / "results" / "sweep.jsonl").read_text().splitlines())

        rerun = runner.invoke(main, args)
        assert rerun.exit_code == 0, rerun.output
        assert len((ws / "results" / "sweep.jsonl").read_text().splitlines()) == store_size


class TestAblation:
    def test_medians_reported(self, style_ws, runner):
        ws = style_ws["ws"]
        result = runner.invoke(
            main,
            ["augment-ablation", "--config", style_ws["cfg"], "--pairs",
             str(ws / "harvest" / "h24"), "--fraction", "0.5", "--ops", "flip",
             "--repetitions", "1"],
        )
        assert result.exit_code == 0, result.output
        assert "none: median" in result.output
        assert "flip: median" in result.output
        assert (ws / "report" / "ablation.csv").is_file()


class TestDefend:
    def test_watermark_requires_secret(self, style_ws, runner):
        result = runner.invoke(
            main,
            ["defend", "--config", style_ws["cfg"], "--defense", "watermark"],
            env={SECRET_ENV_VAR: ""},
        )
        assert result.exit_code != 0
        assert SECRET_ENV_VAR in result.output

    def test_watermark_quota_run(self, style_ws, runner, tmp_path):
        cfg_file = tmp_path / "wm.toml"
        ws = style_ws["ws"]
        cfg_file.write_text(
            Path(style_ws["cfg"]).read_text()
            + '[service]\ndefense = "watermark"\nwatermark_mode = "quota"\nwatermark_rate = 0.1\n'
        )
        result = runner.invoke(
            main,
            ["defend", "--config", str(cfg_file), "--queries", "50"],
            env={SECRET_ENV_VAR: "cli-test-key"},
        )
        assert result.exit_code == 0, result.output
        report = json.loads((ws / "defense" / "watermark" / "report.json").read_text())
        assert report["marked"] == 5  # ceil(0.1 * 50)
        assert report["match_rate"] == pytest.approx(1.0)
        assert report["decision"] is True
        store = ws / "defense" / "watermark" / "trigger_store"
        assert (store / "key_commitment.txt").is_file()

    def test_poison_run(self, style_ws, runner):
        ws = style_ws["ws"]
        result = runner.invoke(
            main,
            ["defend", "--config", style_ws["cfg"], "--defense", "poison",
             "--queries", "6"],
        )
        assert result.exit_code == 0, result.output
        report = json.loads((ws / "defense" / "poison" / "report.json").read_text())
        assert report["linf"] <= 0.25 + 1e-5
        assert 0.0 <= report["flip_rate"] <= 1.0


class TestStats:
    def _score_file(self, path):
        rng = np.random.default_rng(7)
        rows = ["task,model,participant_id,item_id,score"]
        for model, loc in (("victim", 3.4), ("surrogate", 3.1)):
            for pid in range(25):
                for item in range(10):
                    score = int(np.clip(round(rng.normal(loc, 1.0)), 1, 5))
                    rows.append(f"toy,{model},p{pid},i{item},{score}")
        path.write_text("\n".join(rows) + "\n")
        return path

    def test_stats_outputs(self, style_ws, runner, tmp_path):
        scores = self._score_file(tmp_path / "scores.csv")
        result = runner.invoke(
            main, ["stats", "--config", style_ws["cfg"], "--scores", str(scores)]
        )
        assert result.exit_code == 0, result.output
        assert "toy:" in result.output
        payload = json.loads((style_ws["ws"] / "report" / "stats.json").read_text())
        assert set(payload["toy"]) == {"welch", "cohens_d", "tost"}

    def test_bad_score_file(self, style_ws, runner, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("task,model,participant_id,item_id,score\ntoy,victim,p0,i0,9\n")
        result = runner.invoke(
            main, ["stats", "--config", style_ws["cfg"], "--scores", str(bad)]
        )
        assert result.exit_code != 0
        assert "score" in result.output


class TestReport:
    def test_empty_store_fails(self, runner, tmp_path):
        result = runner.invoke(main, ["report", "--workspace", str(tmp_path / "none")])
        assert result.exit_code != 0

    def test_report_renders_tables(self, style_ws, runner):
        # depends on extract/sweep tests having populated the store
        ws = style_ws["ws"]
        result = runner.invoke(main, ["report", "--config", style_ws["cfg"]])
        assert result.exit_code == 0, result.output
        table = (ws / "report" / "table.csv").read_text()
        assert "(B) surrogate-vs-victim" in table
        assert (ws / "report" / "full_scale_reference.csv").is_file()

    def test_manifest_stable_for_same_config(self, style_ws, runner):
        ws = style_ws["ws"]
        path = ws / "manifests" / "report.json"
        first = json.loads(path.read_text())
        result = runner.invoke(main, ["report", "--config", style_ws["cfg"]])
        assert result.exit_code == 0, result.output
        second = json.loads(path.read_text())
        first.pop("timings")
        second.pop("timings")
        assert first == second

"""Report emission: stores, table ordering, determinism."""

import csv

import pytest

from ganmimic.metrics import METRIC_COLUMNS, MetricReport, summarize_scores
from ganmimic.reporting import (
    METRICS_FILENAME,
    SWEEP_FILENAME,
    append_metric_report,
    emit_report,
    load_metric_reports,
    write_budget_curve,
    write_metric_table,
    write_reference_table,
)
from ganmimic.sweep import SweepCell


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def _cells():
    out = []
    for fraction, proxies in ((0.25, (0.61, 0.63)), (1.0, (0.71, 0.69))):
        for rep, proxy in enumerate(proxies):
            out.append(
                SweepCell(
                    fraction=fraction,
                    seed=100 + rep,
                    arch="pix2pix",
                    augmentations=(),
                    n_pairs=int(fraction * 100),
                    status="ok",
                    proxy_ssim=proxy,
                )
            )
    out.append(
        SweepCell(
            fraction=0.25,
            seed=999,
            arch="pix2pix",
            augmentations=(),
            n_pairs=0,
            status="error",
            error="ValueError: boom",
        )
    )
    return out


class TestSummarizeScores:
    def test_basic_stats(self):
        rep = summarize_scores(
            [1.0, 2.0, 3.0], task="toy", test_set="t", comparison="(B) surrogate-vs-victim", metric="ssim"
        )
        assert rep.mean == pytest.approx(2.0)
        assert rep.std == pytest.approx(1.0)
        assert rep.n_runs == 3

    def test_single_run_std_zero(self):
        rep = summarize_scores([0.5], task="toy", test_set="t", comparison="c", metric="ssim")
        assert rep.std == 0.0 and rep.n_runs == 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize_scores([], task="toy", test_set="t", comparison="c", metric="ssim")

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            summarize_scores([0.1, float("nan")], task="toy", test_set="t", comparison="c", metric="ssim")

    def test_row_order_matches_columns(self):
        rep = summarize_scores([2.0], task="toy", test_set="t", comparison="c", metric="psnr")
        assert rep.row() == ("toy", "t", "c", "psnr", 2.0, 0.0, 1)


class TestMetricStore:
    def test_roundtrip(self, tmp_path):
        reports = [
            MetricReport("toy", "held", "(A) victim-vs-truth", "ssim", 0.9, 0.01, 3),
            MetricReport("toy", "held", "(B) surrogate-vs-victim", "ssim", 0.8, 0.02, 3),
        ]
        for r in reports:
            append_metric_report(tmp_path, r)
        assert load_metric_reports(tmp_path) == reports

    def test_missing_store_is_empty(self, tmp_path):
        assert load_metric_reports(tmp_path) == []


class TestMetricTable:
    def test_rows_sorted_into_presentation_order(self, tmp_path):
        shuffled = [
            MetricReport("superres", "d", "(C) surrogate-vs-truth", "psnr", 20.0, 1.0, 5),
            MetricReport("monet", "m", "(B) surrogate-vs-victim", "fid", 42.0, 1.0, 5),
            MetricReport("superres", "d", "(A) victim-vs-truth", "ssim", 0.7, 0.1, 5),
            MetricReport("monet", "m", "(A) victim-vs-truth", "fid", 58.0, 1.0, 5),
            MetricReport("anime", "l", "(A) victim-vs-truth", "fid", 56.0, 1.0, 5),
        ]
        path = write_metric_table(shuffled, tmp_path / "table.csv")
        rows = _read_csv(path)
        assert rows[0] == list(METRIC_COLUMNS)
        leading = [(r[0], r[2], r[3]) for r in rows[1:]]
        assert leading == [
            ("monet", "(A) victim-vs-truth", "fid"),
            ("monet", "(B) surrogate-vs-victim", "fid"),
            ("anime", "(A) victim-vs-truth", "fid"),
            ("superres", "(A) victim-vs-truth", "ssim"),
            ("superres", "(C) surrogate-vs-truth", "psnr"),
        ]

    def test_reference_table_has_all_rows(self, tmp_path):
        path = write_reference_table(tmp_path / "ref.csv")
        rows = _read_csv(path)
        assert len(rows) == 1 + 24
        assert rows[1][:4] == ["monet", "Landscape", "(A) victim-vs-truth", "fid"]
        assert all(r[6] == "5" for r in rows[1:])


class TestBudgetCurve:
    def test_curve_rows(self, tmp_path):
        path = write_budget_curve(_cells(), tmp_path / "curve.csv")
        rows = _read_csv(path)
        assert rows[0] == ["fraction", "augmentations", "n_runs", "mean", "std", "median"]
        assert [r[0] for r in rows[1:]] == ["0.25", "1"]
        quarter = rows[1]
        assert quarter[1] == "none"
        assert quarter[2] == "2"
        assert float(quarter[3]) == pytest.approx(0.62)
        assert float(quarter[5]) == pytest.approx(0.62)

    def test_error_cells_ignored_but_all_failed_raises(self, tmp_path):
        only_errors = [c for c in _cells() if c.status == "error"]
        with pytest.raises(ValueError):
            write_budget_curve(only_errors, tmp_path / "curve.csv")


class TestEmitReport:
    def test_empty_store_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            emit_report(tmp_path / "store", tmp_path / "out")

    def test_full_emission_and_determinism(self, tmp_path):
        store = tmp_path / "store"
        store.mkdir()
        append_metric_report(
            store, MetricReport("toy", "held", "(A) victim-vs-truth", "ssim", 0.9, 0.01, 3)
        )
        with open(store / SWEEP_FILENAME, "w") as fh:
            import json
            from dataclasses import asdict

            for cell in _cells():
                fh.write(json.dumps(asdict(cell)) + "\n")

        first = emit_report(store, tmp_path / "out")
        assert set(first) >= {"table", "full_scale_reference", "budget_curve"}
        snapshots = {name: path.read_bytes() for name, path in first.items()}

        second = emit_report(store, tmp_path / "out")
        for name, path in second.items():
            assert path.read_bytes() == snapshots[name], f"{name} not byte-identical"

    def test_metrics_only_store_skips_curve(self, tmp_path):
        store = tmp_path / "store"
        append_metric_report(
            store, MetricReport("toy", "held", "(B) surrogate-vs-victim", "ssim", 0.8, 0.0, 1)
        )
        artifacts = emit_report(store, tmp_path / "out")
        assert "budget_curve" not in artifacts
        assert (tmp_path / "out" / "table.csv").exists()
        assert (store / METRICS_FILENAME).exists()

    def test_plot_written_when_available(self, tmp_path):
        pytest.importorskip("matplotlib")
        store = tmp_path / "store"
        store.mkdir()
        with open(store / SWEEP_FILENAME, "w") as fh:
            import json
            from dataclasses import asdict

            for cell in _cells():
                fh.write(json.dumps(asdict(cell)) + "\n")
        artifacts = emit_report(store, tmp_path / "out")
        png = artifacts["budget_curve_png"]
        assert png.stat().st_size > 1000
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

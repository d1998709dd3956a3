import json
import threading
from decimal import Decimal

import numpy as np
import pytest
import torch

torch.set_num_threads(1)

from ganmimic.images import ImageFormatError, image_digest, quantize
from ganmimic.models import build_generator
from ganmimic.service import (
    BlackBoxService,
    BudgetExhaustedError,
    BudgetPolicy,
    ClientStats,
    QueryRecord,
    ShapeMismatchError,
    cost_estimate,
    format_currency,
    load_ledger,
)


@pytest.fixture(scope="module")
def generator():
    return build_generator("resnet_translator", image_side=16, preset="tiny", seed=2)


@pytest.fixture
def service(generator):
    return BlackBoxService(generator, policy=BudgetPolicy())


def _img(rng, side=16):
    return rng.random((side, side, 3)).astype(np.float32)


class TestCostAccounting:
    @pytest.mark.parametrize(
        "n,expected",
        [(10_000, "160.00"), (80_000, "1280.00"), (2_700, "43.20"), (0, "0.00"), (1, "0.016")],
    )
    def test_known_costs(self, n, expected):
        assert cost_estimate(n, BudgetPolicy()) == Decimal(expected)

    def test_exact_decimal_no_float_drift(self):
        # 0.016 is not float-representable; the sum must still be exact
        total = cost_estimate(3, BudgetPolicy())
        assert total == Decimal("0.048")
        assert str(total) == "0.048"

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            cost_estimate(-1, BudgetPolicy())

    def test_custom_price(self):
        assert cost_estimate(10, BudgetPolicy(unit_price="1.50")) == Decimal("15.00")

    def test_format_currency(self):
        assert format_currency(Decimal("160.00")) == "$160.00"
        assert format_currency(Decimal("1280")) == "$1,280.00"
        assert format_currency(Decimal("43.2")) == "$43.20"

    def test_policy_validation(self):
        with pytest.raises(ValueError):
            BudgetPolicy(max_queries=-1)
        with pytest.raises(Exception):
            BudgetPolicy(unit_price="a lot")


class TestTransform:
    def test_output_contract(self, service, rng):
        out = service.transform("alice", _img(rng))
        assert out.shape == service.expected_shape
        assert out.min() >= 0.0 and out.max() <= 1.0
        assert np.array_equal(out, quantize(out))  # 8-bit boundary

    def test_matches_generator_up_to_quantization(self, service, generator, rng):
        x = _img(rng)
        out = service.transform("alice", x)
        assert np.array_equal(out, quantize(generator.apply(x)))

    def test_repeat_query_identical(self, service, rng):
        x = _img(rng)
        assert np.array_equal(service.transform("a", x), service.transform("a", x))

    def test_shape_mismatch(self, service, rng):
        with pytest.raises(ShapeMismatchError, match="shape"):
            service.transform("alice", _img(rng, side=8))

    def test_invalid_image(self, service):
        with pytest.raises(ImageFormatError):
            service.transform("alice", np.zeros((16, 16), dtype=np.float32))
        with pytest.raises(ImageFormatError):
            service.transform("alice", np.full((16, 16, 3), 2.0, dtype=np.float32))


class TestBudget:
    def test_budget_enforced(self, generator, rng):
        svc = BlackBoxService(generator, policy=BudgetPolicy(max_queries=3))
        for _ in range(3):
            svc.transform("alice", _img(rng))
        with pytest.raises(BudgetExhaustedError, match="alice"):
            svc.transform("alice", _img(rng))

    def test_budget_is_per_client(self, generator, rng):
        svc = BlackBoxService(generator, policy=BudgetPolicy(max_queries=2))
        svc.transform("alice", _img(rng))
        svc.transform("alice", _img(rng))
        with pytest.raises(BudgetExhaustedError):
            svc.transform("alice", _img(rng))
        svc.transform("bob", _img(rng))  # fresh budget

    def test_failed_query_consumes_no_budget(self, generator, rng):
        svc = BlackBoxService(generator, policy=BudgetPolicy(max_queries=1))
        with pytest.raises(ShapeMismatchError):
            svc.transform("alice", _img(rng, side=8))
        svc.transform("alice", _img(rng))  # budget still intact
        assert svc.client_stats("alice").queries == 1

    def test_zero_budget(self, generator, rng):
        svc = BlackBoxService(generator, policy=BudgetPolicy(max_queries=0))
        with pytest.raises(BudgetExhaustedError):
            svc.transform("alice", _img(rng))

    def test_unlimited_by_default(self, service, rng):
        for _ in range(5):
            service.transform("alice", _img(rng))
        assert service.client_stats("alice").queries == 5


class TestLedger:
    def test_record_fields(self, service, rng):
        x = _img(rng)
        out = service.transform("carol", x)
        rec = service.records[-1]
        assert rec.client_id == "carol"
        assert rec.input_digest == image_digest(x)
        assert rec.output_ref == image_digest(out)
        assert rec.defended == "none"
        assert "T" in rec.timestamp  # ISO 8601

    def test_failed_query_logs_nothing(self, service, rng):
        before = len(service.records)
        with pytest.raises(ShapeMismatchError):
            service.transform("alice", _img(rng, side=8))
        assert len(service.records) == before

    def test_jsonl_roundtrip(self, generator, rng, tmp_path):
        path = tmp_path / "ledger.jsonl"
        with BlackBoxService(generator, policy=BudgetPolicy(), ledger_path=path) as svc:
            for i in range(4):
                svc.transform(f"client{i % 2}", _img(rng))
            in_memory = svc.records
        reloaded = load_ledger(path)
        assert [vars(r) for r in reloaded] == [vars(r) for r in in_memory]

    def test_ledger_lines_are_json(self, generator, rng, tmp_path):
        path = tmp_path / "ledger.jsonl"
        with BlackBoxService(generator, policy=BudgetPolicy(), ledger_path=path) as svc:
            svc.transform("alice", _img(rng))
        payload = json.loads(path.read_text().splitlines()[0])
        assert set(payload) == {
            "client_id", "timestamp", "input_digest", "output_ref", "defended",
        }

    def test_load_ledger_skips_blank_lines(self, tmp_path):
        rec = QueryRecord("a", "t", "d", "o", "none")
        path = tmp_path / "l.jsonl"
        path.write_text(json.dumps(vars(rec)) + "\n\n")
        assert load_ledger(path) == [rec]

    def test_total_queries(self, service, rng):
        service.transform("a", _img(rng))
        service.transform("b", _img(rng))
        assert service.total_queries == 2


class _RecordingHook:
    """Marks every other query and remembers the stats it observed."""

    name = "probe"

    def __init__(self):
        self.seen = []

    def __call__(self, input_image, output_image, input_digest, stats):
        self.seen.append(stats)
        mark = stats.queries % 2 == 1
        return output_image, mark


class TestDefenseHookIntegration:
    def test_hook_observes_in_flight_count(self, generator, rng):
        hook = _RecordingHook()
        svc = BlackBoxService(generator, policy=BudgetPolicy(), defense_hook=hook)
        for _ in range(4):
            svc.transform("alice", _img(rng))
        assert [s.queries for s in hook.seen] == [1, 2, 3, 4]
        assert [s.defended for s in hook.seen] == [0, 1, 1, 2]

    def test_defended_field_uses_hook_name(self, generator, rng):
        svc = BlackBoxService(
            generator, policy=BudgetPolicy(), defense_hook=_RecordingHook()
        )
        svc.transform("alice", _img(rng))
        svc.transform("alice", _img(rng))
        assert [r.defended for r in svc.records] == ["probe", "none"]

    def test_marked_output_still_quantized(self, generator, rng):
        class ShiftHook:
            name = "shift"

            def __call__(self, x, y, digest, stats):
                return np.clip(y + 0.123456, 0.0, 1.0), True

        svc = BlackBoxService(generator, policy=BudgetPolicy(), defense_hook=ShiftHook())
        out = svc.transform("alice", _img(rng))
        assert np.array_equal(out, quantize(out))

    def test_stats_snapshot_immutable(self):
        stats = ClientStats(queries=3, defended=1)
        with pytest.raises(Exception):
            stats.queries = 4


class TestConcurrency:
    def test_parallel_clients_all_served(self, generator, rng):
        svc = BlackBoxService(generator, policy=BudgetPolicy())
        images = [_img(rng) for _ in range(6)]
        errors = []

        def worker(cid):
            try:
                for img in images:
                    svc.transform(cid, img)
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(f"c{i}",)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert svc.total_queries == 24
        for i in range(4):
            assert svc.client_stats(f"c{i}").queries == 6

    def test_budget_never_oversubscribed_under_contention(self, generator, rng):
        svc = BlackBoxService(generator, policy=BudgetPolicy(max_queries=10))
        img = _img(rng)
        denials = []

        def worker():
            for _ in range(5):
                try:
                    svc.transform("shared", img)
                except BudgetExhaustedError:
                    denials.append(1)

        threads = [threading.Thread(target=worker) for _ in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert svc.client_stats("shared").queries == 10
        assert len(denials) == 10
        assert len([r for r in svc.records if r.client_id == "shared"]) == 10

    def test_per_client_ledger_order(self, generator, rng):
        # each client issues distinguishable queries sequentially; the ledger
        # must preserve that order within a client even with interleaving
        svc = BlackBoxService(generator, policy=BudgetPolicy())
        per_client = 8
        digests = {}

        def worker(cid, seed):
            local = np.random.default_rng(seed)
            sent = []
            for _ in range(per_client):
                img = _img(local)
                sent.append(image_digest(img))
                svc.transform(cid, img)
            digests[cid] = sent

        threads = [
            threading.Thread(target=worker, args=(f"c{i}", 100 + i)) for i in range(3)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        for cid, sent in digests.items():
            logged = [r.input_digest for r in svc.records if r.client_id == cid]
            assert logged == sent

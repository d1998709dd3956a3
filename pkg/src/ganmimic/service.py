"""Query service wrapping a victim generator behind an opaque interface.

Every served query appends one record to a line-delimited ledger. Ledger
field names (stable, one JSON object per line):

    client_id     opaque caller token
    timestamp     UTC instant, ISO-8601
    input_digest  SHA-256 content hash of the query image
    output_ref    SHA-256 content hash of the returned image
    defended      none | watermark | poison

Outputs cross the boundary as 8-bit quantized images, matching the PNG wire
format; callers never observe unquantized floats.

Queries from one client are served in a total order (per-client lock), so
quota-style defense decisions see a consistent counter sequence; different
clients run concurrently.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from decimal import Decimal
from pathlib import Path

import numpy as np

from .images import image_digest, quantize, validate_image


class BudgetExhaustedError(RuntimeError):
    """The client has no queries left under the active budget policy."""


class ShapeMismatchError(ValueError):
    """Query image shape is not the one the served generator accepts."""


@dataclass(frozen=True)
class BudgetPolicy:
    max_queries: int | None = None  # None = unlimited
    unit_price: str = "0.016"

    def __post_init__(self):
        if self.max_queries is not None and self.max_queries < 0:
            raise ValueError(f"max_queries must be >= 0, got {self.max_queries}")
        Decimal(self.unit_price)  # fail fast on a malformed price


@dataclass(frozen=True)
class QueryRecord:
    client_id: str
    timestamp: str
    input_digest: str
    output_ref: str
    defended: str


@dataclass(frozen=True)
class ClientStats:
    """Per-client counters; ``queries`` includes the in-flight query when a
    defense hook observes the stats."""

    queries: int = 0
    defended: int = 0


def cost_estimate(n_queries: int, policy: BudgetPolicy) -> Decimal:
    """Exact decimal price of n queries under the policy."""
    if n_queries < 0:
        raise ValueError(f"n_queries must be >= 0, got {n_queries}")
    return Decimal(n_queries) * Decimal(policy.unit_price)


def format_currency(amount: Decimal) -> str:
    return f"${amount.quantize(Decimal('0.01')):,}"


class _ClientState:
    __slots__ = ("lock", "queries", "defended")

    def __init__(self):
        self.lock = threading.Lock()
        self.queries = 0
        self.defended = 0


class BlackBoxService:
    """Serves ``generator`` to opaque clients with budgets and defense hooks.

    ``defense_hook`` is any callable ``(input_image, output_image,
    input_digest, stats) -> (image, marked)``; when ``marked`` is true the
    ledger records the hook's ``name`` in the defended field.
    """

    def __init__(
        self,
        generator,
        policy: BudgetPolicy = BudgetPolicy(),
        ledger_path: str | Path | None = None,
        defense_hook=None,
    ):
        self.generator = generator
        self.policy = policy
        self.defense_hook = defense_hook
        self._lock = threading.Lock()
        self._clients: dict[str, _ClientState] = {}
        self._records: list[QueryRecord] = []
        self._ledger_path = Path(ledger_path) if ledger_path is not None else None
        if self._ledger_path is not None:
            self._ledger_path.parent.mkdir(parents=True, exist_ok=True)
            self._ledger_file = open(self._ledger_path, "a")
        else:
            self._ledger_file = None

    def close(self):
        with self._lock:
            if self._ledger_file is not None:
                self._ledger_file.close()
                self._ledger_file = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @property
    def expected_shape(self) -> tuple[int, int, int]:
        return tuple(self.generator.spec.input_shape)

    def _state(self, client_id: str) -> _ClientState:
        with self._lock:
            return self._clients.setdefault(client_id, _ClientState())

    def client_stats(self, client_id: str) -> ClientStats:
        state = self._state(client_id)
        with state.lock:
            return ClientStats(queries=state.queries, defended=state.defended)

    @property
    def records(self) -> tuple[QueryRecord, ...]:
        with self._lock:
            return tuple(self._records)

    @property
    def total_queries(self) -> int:
        with self._lock:
            states = list(self._clients.values())
        return sum(s.queries for s in states)

    def transform(self, client_id: str, image: np.ndarray) -> np.ndarray:
        """Serve one query; a failed query consumes no budget and logs nothing."""
        arr = validate_image(image)
        if tuple(arr.shape) != self.expected_shape:
            raise ShapeMismatchError(
                f"service accepts images of shape {self.expected_shape}, got {arr.shape}"
            )
        state = self._state(client_id)
        with state.lock:
            if (
                self.policy.max_queries is not None
                and state.queries >= self.policy.max_queries
            ):
                raise BudgetExhaustedError(
                    f"client {client_id!r} exhausted its budget of "
                    f"{self.policy.max_queries} queries"
                )
            state.queries += 1
            try:
                digest = image_digest(arr)
                out = self.generator.apply(arr)
                defended = "none"
                if self.defense_hook is not None:
                    stats = ClientStats(queries=state.queries, defended=state.defended)
                    out, marked = self.defense_hook(arr, out, digest, stats)
                    if marked:
                        defended = getattr(self.defense_hook, "name", "defended")
                        state.defended += 1
                out = quantize(np.clip(out, 0.0, 1.0))
                record = QueryRecord(
                    client_id=client_id,
                    timestamp=datetime.now(timezone.utc).isoformat(),
                    input_digest=digest,
                    output_ref=image_digest(out),
                    defended=defended,
                )
            except Exception:
                state.queries -= 1
                raise
            # still under the client lock: per-client ledger order matches
            # the order queries were served in
            self._append(record)
        return out

    def _append(self, record: QueryRecord) -> None:
        line = json.dumps(vars(record), separators=(",", ":"))
        with self._lock:
            self._records.append(record)
            if self._ledger_file is not None:
                self._ledger_file.write(line + "\n")
                self._ledger_file.flush()


def load_ledger(path: str | Path) -> list[QueryRecord]:
    """Parse a line-delimited ledger file back into records."""
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            records.append(QueryRecord(**json.loads(line)))
    return records

"""Append-only event log: the single source of truth for contest state.

Every mutation is an EventRecord with a monotone sequence number; scores
and phase are folds over the log, so replaying it from disk reproduces the
scoreboard exactly.  Appends serialize through one writer lock; reads see
immutable history.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path

EVENT_KINDS = (
    "submission",
    "test-result",
    "break",
    "fix",
    "phase-change",
    "judge-decision",
)


@dataclass(frozen=True)
class EventRecord:
    seq: int
    timestamp: float
    kind: str
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "seq": self.seq,
                "timestamp": self.timestamp,
                "kind": self.kind,
                "payload": self.payload,
            },
            separators=(",", ":"),
            sort_keys=True,
        )

    @staticmethod
    def from_json(line: str) -> "EventRecord":
        doc = json.loads(line)
        return EventRecord(doc["seq"], doc["timestamp"], doc["kind"], doc["payload"])


class EventLog:
    """JSONL-backed append-only log; `path=None` keeps it in memory."""

    def __init__(self, path: Path | None = None):
        self.path = path
        self._events: list[EventRecord] = []
        self._lock = threading.Lock()
        if path is not None and path.exists():
            with path.open() as handle:
                for line in handle:
                    if line.strip():
                        self._events.append(EventRecord.from_json(line))

    def append(self, kind: str, payload: dict) -> EventRecord:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        with self._lock:
            record = EventRecord(
                seq=len(self._events) + 1,
                timestamp=time.time(),
                kind=kind,
                payload=payload,
            )
            if self.path is not None:
                with self.path.open("a") as handle:
                    handle.write(record.to_json() + "\n")
                    handle.flush()
            self._events.append(record)
            return record

    def events(self, since: int = 0) -> list[EventRecord]:
        with self._lock:
            return [e for e in self._events if e.seq > since]

    @property
    def last_seq(self) -> int:
        with self._lock:
            return self._events[-1].seq if self._events else 0

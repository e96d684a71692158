"""Append-only usage-event log.

Every user or worker action is one immutable record; training data is only
ever derived by replaying the log, never by mutating state. Appends are
flushed and fsynced before they are acknowledged.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from ..hits import SpanRef

SCHEMA_VERSION = 1


class EventKind(str, Enum):
    SELECT = "select"
    DO_NOT_CHANGE = "do_not_change"
    CUSTOM_EDIT = "custom_edit"
    ADD_CP = "add_cp"
    UNDO = "undo"
    REDO = "redo"
    RELOAD = "reload"
    SUBMIT = "submit"


# Kinds that express a worker's stance on one span's candidate list.
SELECTION_KINDS = frozenset({EventKind.SELECT, EventKind.DO_NOT_CHANGE, EventKind.CUSTOM_EDIT})
# Kinds that replace the span text (counted toward the submit gate).
REPLACEMENT_KINDS = frozenset({EventKind.SELECT, EventKind.CUSTOM_EDIT})


@dataclass(frozen=True)
class UsageEvent:
    event_id: int
    timestamp: float
    worker_id: str
    hit_id: str
    iteration: int
    kind: EventKind
    span: SpanRef | None = None
    chosen_surface: str | None = None
    candidate_list_snapshot: tuple[str, ...] | None = None
    snapshot_id: str | None = None
    comment: str | None = None

    def validate(self) -> None:
        if self.iteration < 1:
            raise ValueError("iteration must be >= 1")
        if self.kind in SELECTION_KINDS and self.span is None:
            raise ValueError(f"{self.kind.value} event requires a span")
        if self.kind == EventKind.SELECT:
            if self.candidate_list_snapshot is None:
                raise ValueError("select event requires a candidate snapshot")
            if self.chosen_surface not in self.candidate_list_snapshot:
                raise ValueError(
                    f"chosen surface {self.chosen_surface!r} not in the served snapshot"
                )
        if self.kind == EventKind.CUSTOM_EDIT and not self.chosen_surface:
            raise ValueError("custom_edit event requires the typed surface")

    def to_dict(self) -> dict:
        return {
            "v": SCHEMA_VERSION,
            "event_id": self.event_id,
            "timestamp": self.timestamp,
            "worker_id": self.worker_id,
            "hit_id": self.hit_id,
            "iteration": self.iteration,
            "kind": self.kind.value,
            "span": self.span.to_dict() if self.span else None,
            "chosen_surface": self.chosen_surface,
            "candidate_list_snapshot": list(self.candidate_list_snapshot)
            if self.candidate_list_snapshot is not None
            else None,
            "snapshot_id": self.snapshot_id,
            "comment": self.comment,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "UsageEvent":
        return cls(
            event_id=int(data["event_id"]),
            timestamp=float(data["timestamp"]),
            worker_id=data["worker_id"],
            hit_id=data["hit_id"],
            iteration=int(data["iteration"]),
            kind=EventKind(data["kind"]),
            span=SpanRef.from_dict(data["span"]) if data.get("span") else None,
            chosen_surface=data.get("chosen_surface"),
            candidate_list_snapshot=tuple(data["candidate_list_snapshot"])
            if data.get("candidate_list_snapshot") is not None
            else None,
            snapshot_id=data.get("snapshot_id"),
            comment=data.get("comment"),
        )


class EventLog:
    """Durable append-only JSONL event store with monotone event ids."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._events: list[UsageEvent] = []
        if self.path and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._events.append(UsageEvent.from_dict(json.loads(line)))

    def __len__(self) -> int:
        return len(self._events)

    @property
    def next_event_id(self) -> int:
        return self._events[-1].event_id + 1 if self._events else 1

    def append(
        self,
        worker_id: str,
        hit_id: str,
        iteration: int,
        kind: EventKind,
        span: SpanRef | None = None,
        chosen_surface: str | None = None,
        candidate_list_snapshot: tuple[str, ...] | None = None,
        snapshot_id: str | None = None,
        comment: str | None = None,
    ) -> UsageEvent:
        event = UsageEvent(
            event_id=self.next_event_id,
            timestamp=time.time(),
            worker_id=worker_id,
            hit_id=hit_id,
            iteration=iteration,
            kind=EventKind(kind),
            span=span,
            chosen_surface=chosen_surface,
            candidate_list_snapshot=tuple(candidate_list_snapshot)
            if candidate_list_snapshot is not None
            else None,
            snapshot_id=snapshot_id,
            comment=comment,
        )
        event.validate()
        if self.path:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event.to_dict()) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        self._events.append(event)
        return event

    def events(self) -> list[UsageEvent]:
        """Events in append order (ascending event_id)."""
        return list(self._events)

    @classmethod
    def load(cls, path: str | Path) -> "EventLog":
        return cls(path=path)

"""Turn the event log into graded training groups.

One group per served CP occurrence: the ordered candidate snapshot becomes
the item list, and each candidate's relevance is the number of distinct
workers whose final state selected it. "Final state" is determined by
replaying each worker's event sequence for the span, so undo/redo and
reload behave exactly as they did in the editor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from ..hits import SpanRef
from ..ltr.groups import RankingGroup
from ..pipeline import SpanContext
from .events import SELECTION_KINDS, EventKind, UsageEvent

# Final-state tags produced by replay.
_NONE = ("none", None)


@dataclass(frozen=True)
class GroupItem:
    surface: str
    relevance: int
    features: np.ndarray
    lm_logprob: float


@dataclass(frozen=True)
class TrainingGroup:
    query_id: str
    hit_id: str
    iteration: int
    cp_surface: str
    span: SpanRef
    items: tuple[GroupItem, ...]
    first_event_id: int

    @property
    def trainable(self) -> bool:
        return len({item.relevance for item in self.items}) >= 2

    @property
    def relevances(self) -> np.ndarray:
        return np.array([item.relevance for item in self.items], dtype=np.int64)

    def as_ranking_group(self) -> RankingGroup:
        return RankingGroup(
            query_id=self.query_id,
            features=np.vstack([item.features for item in self.items]),
            relevances=self.relevances,
            item_ids=[item.surface for item in self.items],
        )


def final_selections(
    events: Iterable[UsageEvent],
) -> dict[tuple[str, SpanRef, str], tuple[str, str | None]]:
    """Replay per-worker span histories; returns (hit, span, worker) -> state.

    A state is ("select"|"custom"|"dnc"|"none", surface). Undo moves the
    history pointer back, redo forward; any new action truncates the redo
    tail. A reload resets every span the worker touched in that HIT.
    """
    histories: dict[tuple[str, str], dict[SpanRef, tuple[list, int]]] = {}

    def span_history(hit_id: str, worker_id: str, span: SpanRef) -> tuple[list, int]:
        spans = histories.setdefault((hit_id, worker_id), {})
        if span not in spans:
            spans[span] = ([_NONE], 0)
        return spans[span]

    for event in sorted(events, key=lambda e: e.event_id):
        key = (event.hit_id, event.worker_id)
        if event.kind == EventKind.RELOAD:
            histories.pop(key, None)
            continue
        if event.span is None:
            continue
        if event.kind in SELECTION_KINDS:
            states, ptr = span_history(event.hit_id, event.worker_id, event.span)
            states = states[: ptr + 1]
            if event.kind == EventKind.SELECT:
                states.append(("select", event.chosen_surface))
            elif event.kind == EventKind.DO_NOT_CHANGE:
                states.append(("dnc", None))
            else:
                states.append(("custom", event.chosen_surface))
            histories[key][event.span] = (states, len(states) - 1)
        elif event.kind == EventKind.UNDO:
            states, ptr = span_history(event.hit_id, event.worker_id, event.span)
            histories[key][event.span] = (states, max(0, ptr - 1))
        elif event.kind == EventKind.REDO:
            states, ptr = span_history(event.hit_id, event.worker_id, event.span)
            histories[key][event.span] = (states, min(len(states) - 1, ptr + 1))

    final: dict[tuple[str, SpanRef, str], tuple[str, str | None]] = {}
    for (hit_id, worker_id), spans in histories.items():
        for span, (states, ptr) in spans.items():
            final[(hit_id, span, worker_id)] = states[ptr]
    return final


def build_training_groups(
    events: Iterable[UsageEvent],
    iterations: set[int],
    span_context_fn: Callable[[str, SpanRef], SpanContext],
    binary_for_worker: str | None = None,
) -> list[TrainingGroup]:
    """Groups for the given iterations, with graded or binary relevance.

    Graded mode counts distinct workers per candidate; binary mode restricts
    the log to one worker and marks their selection 1, everything else 0.
    Custom edits count as a selection when they match a shown candidate
    case-insensitively; novel strings carry no ranking signal. Groups whose
    relevances are all zero are still emitted (callers filter by
    `trainable`).
    """
    scoped = [e for e in events if e.iteration in iterations]
    if binary_for_worker is not None:
        scoped = [e for e in scoped if e.worker_id == binary_for_worker]

    snapshots: dict[tuple[str, SpanRef], tuple[int, int, tuple[str, ...]]] = {}
    for event in sorted(scoped, key=lambda e: e.event_id):
        key = (event.hit_id, event.span)
        if (
            event.span is not None
            and event.kind in SELECTION_KINDS
            and event.candidate_list_snapshot is not None
            and key not in snapshots
        ):
            snapshots[key] = (event.event_id, event.iteration, event.candidate_list_snapshot)

    selections = final_selections(scoped)
    by_span: dict[tuple[str, SpanRef], list[tuple[str, tuple[str, str | None]]]] = {}
    for (hit_id, span, worker_id), state in selections.items():
        by_span.setdefault((hit_id, span), []).append((worker_id, state))

    groups: list[TrainingGroup] = []
    for (hit_id, span), (first_id, iteration, snapshot) in sorted(
        snapshots.items(), key=lambda kv: kv[1][0]
    ):
        index = {surface.lower(): i for i, surface in enumerate(snapshot)}
        counts = [0] * len(snapshot)
        for _worker, (state_kind, surface) in by_span.get((hit_id, span), []):
            if state_kind not in ("select", "custom") or surface is None:
                continue
            slot = index.get(surface.lower())
            if slot is not None:
                counts[slot] += 1
        context = span_context_fn(hit_id, span)
        items = []
        for surface, rel in zip(snapshot, counts):
            entry = context.entries.get(surface.lower())
            if entry is None:
                raise ValueError(
                    f"snapshot surface {surface!r} missing from recomputed candidates "
                    f"for {hit_id} {span}"
                )
            items.append(
                GroupItem(
                    surface=surface,
                    relevance=rel,
                    features=entry.features,
                    lm_logprob=entry.lm_logprob,
                )
            )
        groups.append(
            TrainingGroup(
                query_id=f"{hit_id}|{span.sentence_id}|{span.start}:{span.end}",
                hit_id=hit_id,
                iteration=iteration,
                cp_surface=context.cp_surface,
                span=span,
                items=tuple(items),
                first_event_id=first_id,
            )
        )
    return groups

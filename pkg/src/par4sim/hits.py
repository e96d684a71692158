"""HIT documents: the unit of work served to workers.

A HIT is a short document (a handful of sentences) plus gold complex-phrase
spans, tied to exactly one iteration. The store is append-only JSONL so a
service restart or an offline analysis can replay the same documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True, order=True)
class SpanRef:
    sentence_id: str
    start: int
    end: int

    def to_dict(self) -> dict:
        return {"sentence_id": self.sentence_id, "start": self.start, "end": self.end}

    @classmethod
    def from_dict(cls, data: dict) -> "SpanRef":
        return cls(sentence_id=data["sentence_id"], start=int(data["start"]), end=int(data["end"]))


@dataclass(frozen=True)
class Sentence:
    id: str
    text: str


@dataclass(frozen=True)
class Hit:
    hit_id: str
    iteration: int
    sentences: tuple[Sentence, ...]
    gold_spans: tuple[SpanRef, ...]
    assigned_workers: int = 10

    def sentence(self, sentence_id: str) -> Sentence:
        for s in self.sentences:
            if s.id == sentence_id:
                return s
        raise KeyError(f"unknown sentence {sentence_id!r} in {self.hit_id}")

    def document_text(self) -> str:
        return "\n".join(s.text for s in self.sentences)

    def cp_surface(self, span: SpanRef) -> str:
        return self.sentence(span.sentence_id).text[span.start : span.end]

    def validate(self) -> None:
        ids = [s.id for s in self.sentences]
        if len(set(ids)) != len(ids):
            raise ValueError(f"{self.hit_id}: duplicate sentence ids")
        for span in self.gold_spans:
            text = self.sentence(span.sentence_id).text
            if not (0 <= span.start < span.end <= len(text)):
                raise ValueError(
                    f"{self.hit_id}: span {span} outside sentence {span.sentence_id!r}"
                )

    def to_dict(self) -> dict:
        return {
            "hit_id": self.hit_id,
            "iteration": self.iteration,
            "sentences": [{"id": s.id, "text": s.text} for s in self.sentences],
            "gold_spans": [s.to_dict() for s in self.gold_spans],
            "assigned_workers": self.assigned_workers,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Hit":
        return cls(
            hit_id=data["hit_id"],
            iteration=int(data["iteration"]),
            sentences=tuple(Sentence(id=s["id"], text=s["text"]) for s in data["sentences"]),
            gold_spans=tuple(SpanRef.from_dict(s) for s in data["gold_spans"]),
            assigned_workers=int(data.get("assigned_workers", 10)),
        )


class HitStore:
    """In-memory HIT registry mirrored to an append-only JSONL file."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._hits: dict[str, Hit] = {}
        if self.path and self.path.exists():
            with open(self.path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        hit = Hit.from_dict(json.loads(line))
                        self._hits[hit.hit_id] = hit

    def __len__(self) -> int:
        return len(self._hits)

    def add(self, hit: Hit) -> None:
        hit.validate()
        if hit.hit_id in self._hits:
            raise ValueError(f"duplicate hit id {hit.hit_id!r}")
        self._hits[hit.hit_id] = hit
        if self.path:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(hit.to_dict()) + "\n")

    def get(self, hit_id: str) -> Hit:
        return self._hits[hit_id]

    def __contains__(self, hit_id: str) -> bool:
        return hit_id in self._hits

    def hits_in_iteration(self, iteration: int) -> set[str]:
        return {h.hit_id for h in self._hits.values() if h.iteration == iteration}

    def next_id(self) -> str:
        return f"h{len(self._hits):04d}"

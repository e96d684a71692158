"""Paraphrase-resource stores and candidate generation.

Four pluggable stores feed the pipeline: a lexical thesaurus, a
distributional thesaurus, a PPDB-style paraphrase table, and a word/phrase
embedding store. `generate_candidates` unions their per-resource top-k
output into one deduplicated candidate set.

All stores are immutable after load; reloading produces a new value.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .textkit import FrequencyTable, lemmatize_phrase

logger = logging.getLogger(__name__)

PPDB_SCORE_FIELDS = ("ppdb2score", "ppdb1score", "paraphraseScore", "simplificationScore")


@dataclass(frozen=True)
class Thesaurus:
    kind: str  # "lexical" or "distributional"
    entries: dict[str, tuple[tuple[str, float], ...]] = field(default_factory=dict)

    def neighbor_count(self, lemma: str) -> int:
        return len(self.entries.get(lemma, ()))


@dataclass(frozen=True)
class PpdbRow:
    target: str
    ppdb2score: float
    ppdb1score: float
    paraphrase_score: float
    simplification_score: float

    @property
    def scores(self) -> tuple[float, float, float, float]:
        return (self.ppdb2score, self.ppdb1score, self.paraphrase_score, self.simplification_score)


@dataclass(frozen=True)
class PpdbTable:
    entries: dict[str, tuple[PpdbRow, ...]] = field(default_factory=dict)

    def lookup(self, phrase: str) -> tuple[PpdbRow, ...]:
        return self.entries.get(phrase.lower(), ())


@dataclass(frozen=True)
class EmbeddingStore:
    dimension: int
    vectors: dict[str, tuple[float, ...]] = field(default_factory=dict)

    def get(self, phrase: str) -> tuple[float, ...] | None:
        return self.vectors.get(phrase)


@dataclass(frozen=True)
class Candidate:
    """One replacement suggestion with everything later stages attach to it."""

    surface: str
    sources: frozenset[str]
    resource_scores: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    thesaurus_counts: tuple[int, int] = (0, 0)
    lm_logprob: float | None = None
    model_score: float | None = None


@dataclass(frozen=True)
class CandidateSet:
    cp_surface: str
    sentence_id: str
    span: tuple[int, int]
    candidates: tuple[Candidate, ...]


def load_thesaurus(path: str | Path, kind: str) -> Thesaurus:
    """Load `lemma<TAB>n1:w1,n2:w2,...` rows; neighbor lists sorted by weight."""
    entries: dict[str, tuple[tuple[str, float], ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'lemma<TAB>neighbors'")
            lemma, neighbor_field = parts
            neighbors: list[tuple[str, float]] = []
            if neighbor_field.strip():
                for item in neighbor_field.split(","):
                    name, sep, weight_str = item.rpartition(":")
                    if not sep:
                        raise ValueError(f"{path}:{lineno}: bad neighbor {item!r}")
                    try:
                        weight = float(weight_str)
                    except ValueError as exc:
                        raise ValueError(f"{path}:{lineno}: bad weight {weight_str!r}") from exc
                    if name.lower() == lemma.lower():
                        logger.warning("%s:%d: dropping self-neighbor %r", path, lineno, name)
                        continue
                    neighbors.append((name, weight))
            neighbors.sort(key=lambda nw: (-nw[1], nw[0]))
            entries[lemma] = tuple(neighbors)
    return Thesaurus(kind=kind, entries=entries)


def load_ppdb(path: str | Path) -> PpdbTable:
    """Load `source<TAB>target<TAB>ppdb2<TAB>ppdb1<TAB>para<TAB>simp` rows.

    Missing trailing score columns default to 0.0. Rows are ordered by
    descending ppdb2score per source.
    """
    entries: dict[str, list[PpdbRow]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2 or len(parts) > 6:
                raise ValueError(f"{path}:{lineno}: expected 2..6 tab-separated fields")
            source, target = parts[0], parts[1]
            if target.lower() == source.lower():
                logger.warning("%s:%d: dropping self-paraphrase %r", path, lineno, target)
                continue
            scores = [0.0, 0.0, 0.0, 0.0]
            for i, value in enumerate(parts[2:6]):
                try:
                    scores[i] = float(value)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad score {value!r}") from exc
            entries.setdefault(source.lower(), []).append(PpdbRow(target, *scores))
    frozen = {
        src: tuple(sorted(rows, key=lambda r: (-r.ppdb2score, r.target)))
        for src, rows in entries.items()
    }
    return PpdbTable(entries=frozen)


def load_embeddings(path: str | Path) -> EmbeddingStore:
    """Load text word-vector format: header `count dim`, rows `phrase v1 .. vdim`.

    Underscores inside the phrase field decode to spaces.
    """
    vectors: dict[str, tuple[float, ...]] = {}
    dimension: int | None = None
    declared_count: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split()
            if dimension is None:
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected header 'count dim'")
                declared_count, dimension = int(parts[0]), int(parts[1])
                if dimension < 1:
                    raise ValueError(f"{path}:{lineno}: non-positive dimension")
                continue
            phrase = parts[0].replace("_", " ")
            values = parts[1:]
            if len(values) != dimension:
                raise ValueError(
                    f"{path}:{lineno}: expected {dimension} values, got {len(values)}"
                )
            vectors[phrase] = tuple(float(v) for v in values)
    if dimension is None:
        return EmbeddingStore(dimension=0)
    if declared_count is not None and declared_count != len(vectors):
        logger.warning("%s: header declares %d vectors, loaded %d", path, declared_count, len(vectors))
    return EmbeddingStore(dimension=dimension, vectors=vectors)


def neighbors(thesaurus: Thesaurus, lemma: str, k: int) -> list[tuple[str, float]]:
    """First k neighbors of a lemma by descending weight; [] when absent."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return list(thesaurus.entries.get(lemma, ())[:k])


def _cosine(a: tuple[float, ...], b: tuple[float, ...]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def embedding_similar(store: EmbeddingStore, phrase: str, k: int) -> list[tuple[str, float]]:
    """Brute-force cosine neighbors of a stored phrase, ties broken lexicographically."""
    if k < 1:
        raise ValueError("k must be >= 1")
    query = store.get(phrase)
    if query is None:
        return []
    scored = [
        (other, _cosine(query, vec))
        for other, vec in store.vectors.items()
        if other != phrase
    ]
    scored.sort(key=lambda pc: (-pc[1], pc[0]))
    return scored[:k]


def phrase_vector(store: EmbeddingStore, tokens: list[str]) -> tuple[float, ...] | None:
    """Mean of the vectors of in-vocabulary tokens; None when all are OOV."""
    present = [store.get(t) for t in tokens]
    present = [v for v in present if v is not None]
    if not present:
        return None
    n = len(present)
    return tuple(sum(vals) / n for vals in zip(*present))


@dataclass(frozen=True)
class ResourceBundle:
    """Everything candidate generation and feature extraction read from."""

    lexical: Thesaurus
    distributional: Thesaurus
    ppdb: PpdbTable
    embeddings: EmbeddingStore
    freq_simple: FrequencyTable
    freq_web: FrequencyTable
    lemma_dict: dict[str, str] | None = None


def generate_candidates(
    cp_surface: str,
    bundle: ResourceBundle,
    per_resource_k: int = 10,
    sentence_id: str = "",
    span: tuple[int, int] = (0, 0),
) -> CandidateSet:
    """Union the per-resource top-k suggestions for a complex phrase.

    Thesauri are queried by lemma; PPDB and embeddings by surface with a
    lemma fallback. Duplicates merge case-insensitively, keeping the union
    of sources and the element-wise max of PPDB scores. The CP itself is
    never a candidate.
    """
    if not cp_surface.strip():
        raise ValueError("empty CP surface")
    cp_lower = cp_surface.lower()
    lemma = lemmatize_phrase(cp_surface, bundle.lemma_dict)
    counts = (
        bundle.lexical.neighbor_count(lemma),
        bundle.distributional.neighbor_count(lemma),
    )

    merged: dict[str, Candidate] = {}

    def add(surface: str, source: str, scores: tuple[float, float, float, float] | None = None) -> None:
        key = surface.lower()
        if key == cp_lower:
            return
        row_scores = scores if scores is not None else (0.0, 0.0, 0.0, 0.0)
        existing = merged.get(key)
        if existing is None:
            merged[key] = Candidate(
                surface=surface,
                sources=frozenset({source}),
                resource_scores=row_scores,
                thesaurus_counts=counts,
            )
        else:
            merged[key] = replace(
                existing,
                sources=existing.sources | {source},
                resource_scores=tuple(
                    max(a, b) for a, b in zip(existing.resource_scores, row_scores)
                ),
            )

    for phrase, _weight in neighbors(bundle.lexical, lemma, per_resource_k):
        add(phrase, "lexical")
    for phrase, _weight in neighbors(bundle.distributional, lemma, per_resource_k):
        add(phrase, "distributional")

    ppdb_rows = bundle.ppdb.lookup(cp_lower) or bundle.ppdb.lookup(lemma)
    for row in ppdb_rows[:per_resource_k]:
        add(row.target, "ppdb", row.scores)

    for emb_query in (cp_surface, cp_lower, lemma):
        if bundle.embeddings.get(emb_query) is not None:
            for phrase, _cos in embedding_similar(bundle.embeddings, emb_query, per_resource_k):
                add(phrase, "embedding")
            break

    return CandidateSet(
        cp_surface=cp_surface,
        sentence_id=sentence_id,
        span=span,
        candidates=tuple(merged.values()),
    )

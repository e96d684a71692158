"""End-to-end candidate pipeline for one CP occurrence.

Chains resource lookup, LM filtering/ordering, and feature extraction, and
caches the result per (hit, span): everything up to here is independent of
the ranking model, so the cache stays valid across model swaps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import extract
from .hits import Hit, SpanRef
from .lm import TrigramLm, filter_and_order
from .resources import ResourceBundle, generate_candidates
from .textkit import Token, tokenize


@dataclass(frozen=True)
class ServedCandidate:
    surface: str
    sources: tuple[str, ...]
    lm_logprob: float
    features: np.ndarray  # raw, unscaled

    @property
    def ppdb_sum(self) -> float:
        return float(self.features[8:12].sum())


@dataclass(frozen=True)
class SpanContext:
    """What group building needs to know about one served CP occurrence."""

    cp_surface: str
    entries: dict[str, "ServedCandidate"]  # keyed by lowercase surface


class CandidatePipeline:
    def __init__(
        self,
        bundle: ResourceBundle,
        lm: TrigramLm,
        cap: int = 10,
        per_resource_k: int = 10,
        min_logprob: float | None = None,
    ):
        self.bundle = bundle
        self.lm = lm
        self.cap = cap
        self.per_resource_k = per_resource_k
        self.min_logprob = min_logprob
        self._entry_cache: dict[tuple[str, SpanRef], list[ServedCandidate]] = {}
        self._doc_tokens: dict[str, list[Token]] = {}

    def document_tokens(self, hit: Hit) -> list[Token]:
        if hit.hit_id not in self._doc_tokens:
            self._doc_tokens[hit.hit_id] = tokenize(hit.document_text())
        return self._doc_tokens[hit.hit_id]

    def served_entries(self, hit: Hit, span: SpanRef) -> list[ServedCandidate]:
        """Generate, LM-order, cap, and featurize candidates for a span.

        Output order is the LM order; the caller applies any model ranking.
        """
        key = (hit.hit_id, span)
        cached = self._entry_cache.get(key)
        if cached is not None:
            return cached

        sentence = hit.sentence(span.sentence_id)
        cp_surface = sentence.text[span.start : span.end]
        cset = generate_candidates(
            cp_surface,
            self.bundle,
            per_resource_k=self.per_resource_k,
            sentence_id=span.sentence_id,
            span=(span.start, span.end),
        )
        if cset.candidates:
            cset = filter_and_order(
                cset, self.lm, sentence.text, cap=self.cap, min_logprob=self.min_logprob
            )
        doc_tokens = self.document_tokens(hit)
        entries = [
            ServedCandidate(
                surface=cand.surface,
                sources=tuple(sorted(cand.sources)),
                lm_logprob=cand.lm_logprob if cand.lm_logprob is not None else 0.0,
                features=extract(cand, (span.start, span.end), sentence.text, doc_tokens, self.bundle),
            )
            for cand in cset.candidates
        ]
        self._entry_cache[key] = entries
        return entries

    def span_context(self, hit: Hit, span: SpanRef) -> SpanContext:
        entries = self.served_entries(hit, span)
        return SpanContext(
            cp_surface=hit.cp_surface(span),
            entries={e.surface.lower(): e for e in entries},
        )

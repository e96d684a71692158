"""Candidate feature vectors and min-max scaling.

The 14-dimensional layout is frozen; ranking-dataset files use these
indices (1-based) verbatim:

  1 num_chars                 8 distributional_neighbor_count
  2 num_vowels                9 ppdb2score
  3 num_syllables            10 ppdb1score
  4 freq_simple_corpus       11 paraphraseScore
  5 freq_document            12 simplificationScore
  6 freq_web_corpus          13 cos_sentence
  7 lexical_neighbor_count   14 cos_trigram_context
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .resources import Candidate, ResourceBundle, _cosine, phrase_vector
from .textkit import Token, doc_frequency, surface_stats, tokenize

NUM_FEATURES = 14

FEATURE_NAMES = (
    "num_chars",
    "num_vowels",
    "num_syllables",
    "freq_simple_corpus",
    "freq_document",
    "freq_web_corpus",
    "lexical_neighbor_count",
    "distributional_neighbor_count",
    "ppdb2score",
    "ppdb1score",
    "paraphraseScore",
    "simplificationScore",
    "cos_sentence",
    "cos_trigram_context",
)


def _word_tokens(text: str) -> list[str]:
    return [t.surface.lower() for t in tokenize(text) if t.surface.isalnum()]


def extract(
    candidate: Candidate,
    cp_span: tuple[int, int],
    sentence_text: str,
    document_tokens: list[Token],
    bundle: ResourceBundle,
) -> np.ndarray:
    """Raw feature vector for one candidate in its sentence and document.

    Cosines fall back to 0.0 whenever either side has no embedding; PPDB
    scores were already defaulted to 0.0 at candidate generation.
    """
    stats = surface_stats(candidate.surface)
    cand_tokens = _word_tokens(candidate.surface)
    cand_vec = phrase_vector(bundle.embeddings, cand_tokens)

    sentence_tokens = tokenize(sentence_text)
    sent_words = [t.surface.lower() for t in sentence_tokens if t.surface.isalnum()]
    cos_sentence = 0.0
    if cand_vec is not None:
        sent_vec = phrase_vector(bundle.embeddings, sent_words)
        if sent_vec is not None:
            cos_sentence = _cosine(cand_vec, sent_vec)

    start, end = cp_span
    left = [t.surface.lower() for t in sentence_tokens if t.end <= start and t.surface.isalnum()]
    right = [t.surface.lower() for t in sentence_tokens if t.start >= end and t.surface.isalnum()]
    context_words = (left[-1:] if left else []) + cand_tokens + (right[:1] if right else [])
    cos_context = 0.0
    if cand_vec is not None:
        ctx_vec = phrase_vector(bundle.embeddings, context_words)
        if ctx_vec is not None:
            cos_context = _cosine(cand_vec, ctx_vec)

    vec = np.array(
        [
            stats.chars,
            stats.vowels,
            stats.syllables,
            bundle.freq_simple.count(candidate.surface),
            doc_frequency(document_tokens, candidate.surface),
            bundle.freq_web.count(candidate.surface),
            candidate.thesaurus_counts[0],
            candidate.thesaurus_counts[1],
            *candidate.resource_scores,
            cos_sentence,
            cos_context,
        ],
        dtype=np.float64,
    )
    assert vec.shape == (NUM_FEATURES,)
    return vec


@dataclass(frozen=True)
class Scaler:
    """Per-feature min-max bounds, persisted with any model trained on them."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]


def fit_scaler(vectors: np.ndarray) -> Scaler:
    matrix = np.asarray(vectors, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1:
        raise ValueError("need at least one feature vector")
    return Scaler(mins=tuple(matrix.min(axis=0)), maxs=tuple(matrix.max(axis=0)))


def apply_scaler(scaler: Scaler, vectors: np.ndarray) -> np.ndarray:
    """Scale rows to [0,1]; constant columns map to 0.5, out-of-range clamps."""
    matrix = np.asarray(vectors, dtype=np.float64)
    single = matrix.ndim == 1
    if single:
        matrix = matrix[None, :]
    mins = np.asarray(scaler.mins)
    maxs = np.asarray(scaler.maxs)
    span = maxs - mins
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(span > 0, (matrix - mins) / np.where(span > 0, span, 1.0), 0.5)
    scaled = np.clip(scaled, 0.0, 1.0)
    return scaled[0] if single else scaled

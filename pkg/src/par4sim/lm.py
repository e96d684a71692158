"""Interpolated trigram language model for contextual candidate filtering.

The model mixes trigram and bigram maximum-likelihood estimates with an
add-one unigram floor under fixed interpolation weights. The unigram floor
keeps every conditional probability strictly positive, so log scores are
always defined.

Counts are tabulated over sentences padded with two begin markers; the
event space is the real-word vocabulary plus one out-of-vocabulary bucket,
so the add-one floor is a proper distribution over exactly that space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from .resources import CandidateSet
from .textkit import tokenize

BOS = "<s>"

DEFAULT_WEIGHTS = (0.6, 0.3, 0.1)


def _validate_weights(weights: tuple[float, float, float]) -> None:
    l3, l2, l1 = weights
    if min(l3, l2, l1) < 0:
        raise ValueError("interpolation weights must be non-negative")
    if abs(l3 + l2 + l1 - 1.0) > 1e-9:
        raise ValueError("interpolation weights must sum to 1")
    if l1 <= 0:
        raise ValueError("unigram weight must be positive to keep probabilities > 0")


@dataclass(frozen=True)
class TrigramLm:
    weights: tuple[float, float, float]  # (lambda3, lambda2, lambda1)
    unigrams: dict[str, int] = field(default_factory=dict)
    bigrams: dict[tuple[str, str], int] = field(default_factory=dict)
    trigrams: dict[tuple[str, str, str], int] = field(default_factory=dict)
    bigram_history: dict[str, int] = field(default_factory=dict)
    trigram_history: dict[tuple[str, str], int] = field(default_factory=dict)
    total_tokens: int = 0
    vocab_size: int = 0


def train_trigram(
    sentences: Iterable[list[str]],
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS,
) -> TrigramLm:
    """Tabulate n-gram counts over token sentences padded with two begin markers."""
    _validate_weights(tuple(weights))
    unigrams: dict[str, int] = {}
    bigrams: dict[tuple[str, str], int] = {}
    trigrams: dict[tuple[str, str, str], int] = {}
    bigram_history: dict[str, int] = {}
    trigram_history: dict[tuple[str, str], int] = {}
    total = 0
    for sentence in sentences:
        if not sentence:
            continue
        for i, w in enumerate(sentence):
            h1 = sentence[i - 2] if i >= 2 else BOS
            h2 = sentence[i - 1] if i >= 1 else BOS
            unigrams[w] = unigrams.get(w, 0) + 1
            bigrams[(h2, w)] = bigrams.get((h2, w), 0) + 1
            trigrams[(h1, h2, w)] = trigrams.get((h1, h2, w), 0) + 1
            bigram_history[h2] = bigram_history.get(h2, 0) + 1
            trigram_history[(h1, h2)] = trigram_history.get((h1, h2), 0) + 1
            total += 1
    if total == 0:
        raise ValueError("empty corpus")
    return TrigramLm(
        weights=tuple(weights),
        unigrams=unigrams,
        bigrams=bigrams,
        trigrams=trigrams,
        bigram_history=bigram_history,
        trigram_history=trigram_history,
        total_tokens=total,
        vocab_size=len(unigrams),
    )


def train_from_text(
    text: str, weights: tuple[float, float, float] = DEFAULT_WEIGHTS
) -> TrigramLm:
    """Train from plain text, one sentence per line, lowercased tokens."""
    sentences = [
        [t.surface.lower() for t in tokenize(line)] for line in text.splitlines()
    ]
    return train_trigram([s for s in sentences if s], weights)


def load_corpus(path: str | Path, weights: tuple[float, float, float] = DEFAULT_WEIGHTS) -> TrigramLm:
    with open(path, encoding="utf-8") as fh:
        return train_from_text(fh.read(), weights)


def cond_prob(lm: TrigramLm, w: str, h1: str, h2: str) -> float:
    """Interpolated P(w | h1 h2); strictly positive for any word."""
    l3, l2, l1 = lm.weights
    p = 0.0
    tri_hist = lm.trigram_history.get((h1, h2), 0)
    if tri_hist:
        p += l3 * lm.trigrams.get((h1, h2, w), 0) / tri_hist
    bi_hist = lm.bigram_history.get(h2, 0)
    if bi_hist:
        p += l2 * lm.bigrams.get((h2, w), 0) / bi_hist
    p += l1 * (lm.unigrams.get(w, 0) + 1) / (lm.total_tokens + lm.vocab_size + 1)
    return p


def score_replacement(
    lm: TrigramLm,
    sentence_tokens: list[str],
    span: tuple[int, int],
    candidate_tokens: list[str],
) -> float:
    """Mean natural-log probability of the trigrams around a substituted span.

    The candidate replaces `sentence_tokens[span[0]:span[1]]`; every trigram
    whose target lies within the candidate or two tokens to either side is
    scored. Mean normalization keeps candidates of different lengths
    comparable.
    """
    start, end = span
    if not (0 <= start < end <= len(sentence_tokens)):
        raise ValueError("span out of bounds")
    if not candidate_tokens:
        raise ValueError("empty candidate")
    new_tokens = list(sentence_tokens[:start]) + list(candidate_tokens) + list(sentence_tokens[end:])
    lo = max(0, start - 2)
    hi = min(len(new_tokens) - 1, start + len(candidate_tokens) - 1 + 2)
    logs = []
    for t in range(lo, hi + 1):
        h1 = new_tokens[t - 2] if t >= 2 else BOS
        h2 = new_tokens[t - 1] if t >= 1 else BOS
        logs.append(math.log(cond_prob(lm, new_tokens[t], h1, h2)))
    return sum(logs) / len(logs)


def _token_span(sentence_text: str, span: tuple[int, int]) -> tuple[list[str], tuple[int, int]]:
    """Map character offsets to the covered token index range."""
    tokens = tokenize(sentence_text)
    start, end = span
    covered = [i for i, t in enumerate(tokens) if t.end > start and t.start < end]
    if not covered:
        raise ValueError(f"span {span} covers no tokens")
    surfaces = [t.surface.lower() for t in tokens]
    return surfaces, (covered[0], covered[-1] + 1)


def candidate_sort_key(surface: str, lm_logprob: float, resource_scores: tuple[float, ...]):
    return (-lm_logprob, -sum(resource_scores), surface.lower())


def filter_and_order(
    candidate_set: CandidateSet,
    lm: TrigramLm,
    sentence_text: str,
    cap: int = 10,
    min_logprob: float | None = None,
) -> CandidateSet:
    """Score every candidate in context, order by LM score, truncate to `cap`.

    Ties break on descending PPDB score sum, then lexicographic surface. The
    optional absolute threshold drops candidates below `min_logprob` before
    the cap is applied (off by default).
    """
    surfaces, token_span = _token_span(sentence_text, candidate_set.span)
    scored = []
    for cand in candidate_set.candidates:
        cand_tokens = [t.surface.lower() for t in tokenize(cand.surface)]
        logprob = score_replacement(lm, surfaces, token_span, cand_tokens)
        scored.append(replace(cand, lm_logprob=logprob))
    if min_logprob is not None:
        scored = [c for c in scored if c.lm_logprob >= min_logprob]
    scored.sort(key=lambda c: candidate_sort_key(c.surface, c.lm_logprob, c.resource_scores))
    return replace(candidate_set, candidates=tuple(scored[:cap]))


def save_lm(lm: TrigramLm, path: str | Path) -> None:
    """Persist as a JSON header line followed by sorted n-gram count rows."""
    header = {
        "weights": list(lm.weights),
        "total_tokens": lm.total_tokens,
        "vocab_size": lm.vocab_size,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for w, c in sorted(lm.unigrams.items()):
            fh.write(f"1\t{w}\t{c}\n")
        for (h2, w), c in sorted(lm.bigrams.items()):
            fh.write(f"2\t{h2} {w}\t{c}\n")
        for (h1, h2, w), c in sorted(lm.trigrams.items()):
            fh.write(f"3\t{h1} {h2} {w}\t{c}\n")


def load_lm(path: str | Path) -> TrigramLm:
    unigrams: dict[str, int] = {}
    bigrams: dict[tuple[str, str], int] = {}
    trigrams: dict[tuple[str, str, str], int] = {}
    bigram_history: dict[str, int] = {}
    trigram_history: dict[tuple[str, str], int] = {}
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            order, gram, count_str = line.split("\t")
            count = int(count_str)
            parts = tuple(gram.split(" "))
            if order == "1":
                unigrams[parts[0]] = count
            elif order == "2":
                bigrams[parts] = count
                bigram_history[parts[0]] = bigram_history.get(parts[0], 0) + count
            elif order == "3":
                trigrams[parts] = count
                trigram_history[parts[:2]] = trigram_history.get(parts[:2], 0) + count
            else:
                raise ValueError(f"{path}:{lineno}: bad n-gram order {order!r}")
    return TrigramLm(
        weights=tuple(header["weights"]),
        unigrams=unigrams,
        bigrams=bigrams,
        trigrams=trigrams,
        bigram_history=bigram_history,
        trigram_history=trigram_history,
        total_tokens=header["total_tokens"],
        vocab_size=header["vocab_size"],
    )

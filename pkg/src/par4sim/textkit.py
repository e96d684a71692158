"""Tokenization, surface statistics, lightweight lemmatization, frequency tables.

These are the text primitives the candidate generator and feature extractor
are built on. Everything here is deterministic and dictionary-free unless a
lemma dictionary is supplied explicitly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

VOWELS = frozenset("aeiou")


@dataclass(frozen=True)
class Token:
    """A token with its character offsets into the source text."""

    surface: str
    start: int
    end: int


@dataclass(frozen=True)
class LengthStats:
    chars: int
    vowels: int
    syllables: int


def tokenize(text: str) -> list[Token]:
    """Split text into alphanumeric runs and single punctuation characters.

    Whitespace separates tokens and is the only material dropped, so the
    original text can be reconstructed from token offsets.
    """
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isalnum():
            j = i + 1
            while j < n and text[j].isalnum():
                j += 1
            tokens.append(Token(text[i:j], i, j))
            i = j
        else:
            tokens.append(Token(ch, i, i + 1))
            i += 1
    return tokens


def surface_stats(phrase: str) -> LengthStats:
    """Character, vowel, and syllable counts for a word or phrase.

    Syllables are counted as maximal vowel-letter runs per word with a floor
    of one per word; crude, but deterministic and monotone in word length.
    """
    if not phrase or not phrase.strip():
        raise ValueError("empty phrase")
    chars = sum(1 for c in phrase if not c.isspace())
    lower = phrase.lower()
    vowels = sum(1 for c in lower if c in VOWELS)
    syllables = 0
    for word in lower.split():
        runs = 0
        in_run = False
        for c in word:
            if c in VOWELS:
                if not in_run:
                    runs += 1
                in_run = True
            else:
                in_run = False
        syllables += max(runs, 1)
    return LengthStats(chars=chars, vowels=vowels, syllables=syllables)


def _strip_suffix_once(word: str) -> str:
    """Apply the first matching suffix rule, or return the word unchanged."""
    if word.endswith("ies") and len(word) >= 5:
        return word[:-3] + "y"
    if word.endswith("es") and len(word) >= 5:
        return word[:-2]
    if word.endswith("s") and len(word) >= 4 and not word.endswith("ss"):
        return word[:-1]
    if word.endswith("ing") and len(word) >= 6:
        stem = word[:-3]
        if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in VOWELS:
            stem = stem[:-1]
        return stem
    if word.endswith("ed") and len(word) >= 5:
        stem = word[:-2]
        if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in VOWELS:
            return stem[:-1]
        if stem.endswith(("at", "bl", "iz")):
            return stem + "e"
        return stem
    return word


def lemmatize(token: str, lemma_dict: dict[str, str] | None = None) -> str:
    """Reduce a token to a base form: dictionary first, then suffix rules.

    The rule cascade is applied to a fixed point, which makes the function
    idempotent on its own output.
    """
    if not token:
        raise ValueError("empty token")
    if lemma_dict:
        hit = lemma_dict.get(token) or lemma_dict.get(token.lower())
        if hit is not None:
            return hit.lower()
    word = token.lower()
    while True:
        stripped = _strip_suffix_once(word)
        if stripped == word:
            return word
        word = stripped


def lemmatize_phrase(phrase: str, lemma_dict: dict[str, str] | None = None) -> str:
    """Lemmatize each whitespace-separated word of a phrase."""
    return " ".join(lemmatize(w, lemma_dict) for w in phrase.split())


def doc_frequency(document_tokens: list[Token], phrase: str) -> int:
    """Case-insensitive occurrence count of a phrase's token sequence."""
    needle = [t.surface.lower() for t in tokenize(phrase)]
    if not needle:
        raise ValueError("phrase tokenizes to no tokens")
    haystack = [t.surface.lower() for t in document_tokens]
    m = len(needle)
    return sum(1 for i in range(len(haystack) - m + 1) if haystack[i : i + m] == needle)


@dataclass(frozen=True)
class FrequencyTable:
    """Phrase frequency lookup; absent phrases count 0, keys are lowercase."""

    name: str
    entries: dict[str, int] = field(default_factory=dict)

    def count(self, phrase: str) -> int:
        return self.entries.get(phrase.lower(), 0)

    @classmethod
    def load(cls, path: str | Path, name: str) -> "FrequencyTable":
        entries: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 'phrase<TAB>count'")
                phrase, count_str = parts
                try:
                    count = int(count_str)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad count {count_str!r}") from exc
                if count < 0:
                    raise ValueError(f"{path}:{lineno}: negative count {count}")
                entries[phrase.lower()] = count
        return cls(name=name, entries=entries)

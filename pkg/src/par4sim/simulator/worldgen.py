"""Synthetic desk-scale world: vocabulary, documents, and resource files.

Everything derives deterministically from one seed. The generated resources
have the same shape as the real ones (thesauri, paraphrase table with four
scores, embeddings, frequency tables, LM corpus), with feature ranges wide
enough that a preference over them is learnable from selection counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..hits import SpanRef
from ..textkit import lemmatize

CONSONANTS = "bcdfglmnprstvz"
VOWELS = "aeiou"


@dataclass(frozen=True)
class WorldSpec:
    seed: int = 42
    n_documents: int = 108
    sentences_per_document: int = 5
    cps_per_document: int = 4
    n_cp_types: int = 80
    candidate_vocab: int = 500
    cp_pool_size: int = 20
    neighbors_per_resource: int = 10
    filler_vocab: int = 40
    embedding_dim: int = 12
    lm_corpus_lines: int = 800
    extra_documents: int = 12  # held out for the generic baseline dataset


@dataclass(frozen=True)
class SimDocument:
    sentences: tuple[tuple[str, str], ...]  # (sentence_id, text)
    cp_spans: tuple[SpanRef, ...]


@dataclass
class World:
    spec: WorldSpec
    dir: Path
    documents: list[SimDocument]
    baseline_documents: list[SimDocument]
    paths: dict[str, str] = field(default_factory=dict)


def _make_word(rng: np.random.Generator, min_syllables: int, max_syllables: int) -> str:
    n = int(rng.integers(min_syllables, max_syllables + 1))
    parts = []
    for _ in range(n):
        syllable = CONSONANTS[rng.integers(len(CONSONANTS))] + VOWELS[rng.integers(len(VOWELS))]
        if rng.random() < 0.3:
            syllable += CONSONANTS[rng.integers(len(CONSONANTS))]
        parts.append(syllable)
    return "".join(parts)


def _unique_words(rng, count, min_syllables, max_syllables, taken):
    words = []
    while len(words) < count:
        word = _make_word(rng, min_syllables, max_syllables)
        if word not in taken:
            taken.add(word)
            words.append(word)
    return words


def _sentence_with_slot(rng, fillers, slot_word: str | None) -> tuple[str, tuple[int, int] | None]:
    """A template sentence; returns text and the slot word's char offsets."""
    n_before = int(rng.integers(2, 4))
    n_after = int(rng.integers(1, 3))
    before = ["the"] + [fillers[rng.integers(len(fillers))] for _ in range(n_before)]
    after = [fillers[rng.integers(len(fillers))] for _ in range(n_after)]
    if slot_word is None:
        text = " ".join(before + after) + "."
        return text, None
    prefix = " ".join(before)
    start = len(prefix) + 1
    end = start + len(slot_word)
    text = prefix + " " + slot_word + " " + " ".join(after) + "."
    return text, (start, end)


def generate_world(spec: WorldSpec, out_dir: str | Path) -> World:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)

    taken: set[str] = set()
    cp_words = _unique_words(rng, spec.n_cp_types, 3, 5, taken)
    candidate_words = _unique_words(rng, spec.candidate_vocab, 1, 4, taken)
    filler_words = _unique_words(rng, spec.filler_vocab, 1, 3, taken)
    all_words = cp_words + candidate_words + filler_words + ["the"]

    # Frequency tables: skewed counts so "simplicity" has a wide range; the
    # two corpora are independent so they carry distinct signals.
    freq_simple = {w: int(1500 * rng.random() ** 3) for w in all_words}
    freq_web = {w: int(20000 * rng.random() ** 3) for w in all_words}

    # Per-CP candidate pools and resource rows.
    lexical_lines = []
    distributional_lines = []
    ppdb_lines = []
    pools: dict[str, list[str]] = {}
    seen_lemmas: set[str] = set()
    for cp in cp_words:
        pool = list(rng.choice(candidate_words, size=spec.cp_pool_size, replace=False))
        pools[cp] = pool
        lemma = lemmatize(cp)
        if lemma in seen_lemmas:
            continue
        seen_lemmas.add(lemma)
        k = spec.neighbors_per_resource
        lex = list(rng.choice(pool, size=k, replace=False))
        lex_weights = sorted((float(rng.uniform(0.1, 1.0)) for _ in lex), reverse=True)
        lexical_lines.append(
            f"{lemma}\t" + ",".join(f"{w}:{wt:.3f}" for w, wt in zip(lex, lex_weights))
        )
        dist = list(rng.choice(pool, size=k, replace=False))
        dist_weights = sorted((float(rng.uniform(0.1, 1.0)) for _ in dist), reverse=True)
        distributional_lines.append(
            f"{lemma}\t" + ",".join(f"{w}:{wt:.3f}" for w, wt in zip(dist, dist_weights))
        )
        for target in rng.choice(pool, size=k, replace=False):
            scores = (
                rng.uniform(0, 5),
                rng.uniform(0, 5),
                rng.uniform(0, 1),
                rng.uniform(0, 5),
            )
            ppdb_lines.append(
                f"{cp}\t{target}\t" + "\t".join(f"{s:.4f}" for s in scores)
            )

    # Embeddings for every word.
    emb_lines = [f"{len(all_words)} {spec.embedding_dim}"]
    for w in all_words:
        vec = rng.normal(size=spec.embedding_dim)
        emb_lines.append(w + " " + " ".join(f"{v:.5f}" for v in vec))

    # LM corpus: slot sentences over CPs and candidates so context scores vary.
    lm_lines = []
    slot_vocab = cp_words + candidate_words
    for _ in range(spec.lm_corpus_lines):
        word = slot_vocab[rng.integers(len(slot_vocab))]
        text, _span = _sentence_with_slot(rng, filler_words, word)
        lm_lines.append(text)

    def build_documents(count: int, prefix: str) -> list[SimDocument]:
        docs = []
        for d in range(count):
            sentences = []
            spans = []
            cp_slots = set(
                rng.choice(spec.sentences_per_document, size=min(spec.cps_per_document, spec.sentences_per_document), replace=False)
            )
            for s in range(spec.sentences_per_document):
                sid = f"{prefix}{d}-s{s}"
                if s in cp_slots:
                    cp = cp_words[rng.integers(len(cp_words))]
                    text, offsets = _sentence_with_slot(rng, filler_words, cp)
                    sentences.append((sid, text))
                    spans.append(SpanRef(sentence_id=sid, start=offsets[0], end=offsets[1]))
                else:
                    text, _ = _sentence_with_slot(rng, filler_words, None)
                    sentences.append((sid, text))
            docs.append(SimDocument(sentences=tuple(sentences), cp_spans=tuple(spans)))
        return docs

    documents = build_documents(spec.n_documents, "d")
    baseline_documents = build_documents(spec.extra_documents, "b")

    paths = {
        "lexical_thesaurus": str(out / "lexical.tsv"),
        "distributional_thesaurus": str(out / "distributional.tsv"),
        "ppdb": str(out / "ppdb.tsv"),
        "embeddings": str(out / "embeddings.txt"),
        "freq_simple_corpus": str(out / "freq_simple.tsv"),
        "freq_web_corpus": str(out / "freq_web.tsv"),
        "lm_corpus": str(out / "lm_corpus.txt"),
    }
    (out / "lexical.tsv").write_text("\n".join(lexical_lines) + "\n", encoding="utf-8")
    (out / "distributional.tsv").write_text("\n".join(distributional_lines) + "\n", encoding="utf-8")
    (out / "ppdb.tsv").write_text("\n".join(ppdb_lines) + "\n", encoding="utf-8")
    (out / "embeddings.txt").write_text("\n".join(emb_lines) + "\n", encoding="utf-8")
    (out / "freq_simple.tsv").write_text(
        "\n".join(f"{w}\t{c}" for w, c in freq_simple.items()) + "\n", encoding="utf-8"
    )
    (out / "freq_web.tsv").write_text(
        "\n".join(f"{w}\t{c}" for w, c in freq_web.items()) + "\n", encoding="utf-8"
    )
    (out / "lm_corpus.txt").write_text("\n".join(lm_lines) + "\n", encoding="utf-8")

    return World(
        spec=spec,
        dir=out,
        documents=documents,
        baseline_documents=baseline_documents,
        paths=paths,
    )

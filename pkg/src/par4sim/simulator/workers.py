"""Simulated workers with hidden linear preferences over raw features.

A worker scores every served candidate as weights . raw_features plus a
do-not-change pseudo-option at a fixed bias, then samples from a softmax at
its temperature. Temperature 0 is argmax (ties to the lowest index);
temperature None is a uniformly random crowd used as a null control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..features import NUM_FEATURES

DO_NOT_CHANGE = -1


@dataclass(frozen=True)
class SimWorker:
    worker_id: str
    weights: tuple[float, ...]
    temperature: float | None = 0.7
    do_not_change_bias: float = -1.0
    custom_edit_rate: float = 0.0
    undo_rate: float = 0.0

    def __post_init__(self) -> None:
        if len(self.weights) != NUM_FEATURES:
            raise ValueError(f"weights must have length {NUM_FEATURES}")


def choose(worker: SimWorker, feature_rows: np.ndarray, rng: np.random.Generator) -> int:
    """Candidate index, or DO_NOT_CHANGE for the pseudo-option."""
    rows = np.asarray(feature_rows, dtype=np.float64)
    n = len(rows)
    if n == 0:
        return DO_NOT_CHANGE
    if worker.do_not_change_bias == math.inf:
        return DO_NOT_CHANGE
    utilities = rows @ np.asarray(worker.weights)
    options = np.append(utilities, worker.do_not_change_bias)
    if worker.temperature is None:
        idx = int(rng.integers(len(options)))
    elif worker.temperature == 0:
        idx = int(np.argmax(options))  # first max wins: lowest index on ties
    else:
        z = options / worker.temperature
        z -= z.max()
        p = np.exp(z)
        p /= p.sum()
        idx = int(rng.choice(len(options), p=p))
    return DO_NOT_CHANGE if idx == n else idx


def second_best(worker: SimWorker, feature_rows: np.ndarray, exclude: int) -> int:
    """Deterministic runner-up by utility, for undo-then-reselect behavior."""
    rows = np.asarray(feature_rows, dtype=np.float64)
    utilities = rows @ np.asarray(worker.weights)
    order = np.lexsort((np.arange(len(utilities)), -utilities))
    for idx in order:
        if int(idx) != exclude:
            return int(idx)
    return exclude


def _weights(**sparse: float) -> tuple[float, ...]:
    vec = [0.0] * NUM_FEATURES
    index = {
        "chars": 0,
        "vowels": 1,
        "syllables": 2,
        "freq_simple": 3,
        "freq_doc": 4,
        "freq_web": 5,
        "lex_count": 6,
        "dist_count": 7,
        "ppdb2": 8,
        "ppdb1": 9,
        "para": 10,
        "simp": 11,
        "cos_sentence": 12,
        "cos_context": 13,
    }
    for name, value in sparse.items():
        vec[index[name]] = value
    return tuple(vec)


# The shared crowd preference: favors frequent, short, high-simplification
# candidates that fit the sentence. Contributions are deliberately spread
# over many features at comparable magnitudes (matched to the synthetic
# world's raw ranges), so the preference is learnable but not from a
# handful of groups.
SHARED_BASE = _weights(
    chars=-0.25,
    vowels=-0.5,
    syllables=-0.7,
    freq_simple=0.0015,
    freq_web=0.0001,
    ppdb2=0.4,
    ppdb1=0.35,
    para=2.0,
    simp=0.45,
    cos_sentence=1.0,
    cos_context=0.8,
)

# An easy-mode consensus dominated by one frequency feature, so the ranker
# can realize it almost perfectly from a handful of batches.
SIMPLE_BASE = _weights(syllables=-0.15, freq_simple=0.004)

# One dominant feature per worker; deliberately conflicting directions.
HETEROGENEOUS = [
    _weights(chars=-0.8),
    _weights(vowels=-2.0),
    _weights(syllables=-2.5),
    _weights(freq_simple=0.008),
    _weights(freq_web=0.0004),
    _weights(ppdb2=2.0),
    _weights(ppdb1=2.0),
    _weights(para=9.0),
    _weights(simp=2.0),
    _weights(cos_sentence=4.0),
]

GENERIC_BASELINE = _weights(freq_web=0.0003, chars=-0.4, ppdb1=0.8)


def build_crowd(
    profile: str,
    size: int,
    seed: int,
    temperature: float | None = 0.7,
    dnc_bias: float = -1.0,
    jitter: float = 0.15,
    custom_edit_rate: float = 0.03,
    undo_rate: float = 0.03,
) -> list[SimWorker]:
    rng = np.random.default_rng([seed, 901])
    workers = []
    for i in range(size):
        if profile in ("shared", "simple"):
            base = SHARED_BASE if profile == "shared" else SIMPLE_BASE
            weights = tuple(w * (1.0 + jitter * float(rng.normal())) for w in base)
            temp = temperature
        elif profile == "heterogeneous":
            weights = HETEROGENEOUS[i % len(HETEROGENEOUS)]
            temp = 0.3 if temperature is None else temperature
        elif profile == "uniform":
            weights = (0.0,) * NUM_FEATURES
            temp = None
        else:
            raise ValueError(f"unknown crowd profile {profile!r}")
        workers.append(
            SimWorker(
                worker_id=f"w{i:02d}",
                weights=weights,
                temperature=temp,
                do_not_change_bias=dnc_bias,
                custom_edit_rate=custom_edit_rate,
                undo_rate=undo_rate,
            )
        )
    return workers

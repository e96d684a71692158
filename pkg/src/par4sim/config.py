"""Service configuration: resource paths, LM setup, training knobs.

Loaded from a JSON file; relative paths resolve against the file's
directory so config bundles can be moved around as a unit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .ltr.model import TrainParams


@dataclass(frozen=True)
class ResourcePaths:
    lexical_thesaurus: str
    distributional_thesaurus: str
    ppdb: str
    embeddings: str
    freq_simple_corpus: str
    freq_web_corpus: str
    lemma_dict: str | None = None


@dataclass(frozen=True)
class LmSettings:
    corpus: str
    weights: tuple[float, float, float] = (0.6, 0.3, 0.1)
    min_logprob: float | None = None


@dataclass(frozen=True)
class ServiceSettings:
    candidate_cap: int = 10
    per_resource_k: int = 10
    submit_threshold: int = 3
    workers_per_hit: int = 10
    min_hit_sentences: int = 1
    max_hit_sentences: int = 50
    personalization: bool = False
    personal_min_iterations: int = 2


@dataclass(frozen=True)
class AppConfig:
    resources: ResourcePaths
    lm: LmSettings
    data_dir: str
    train: TrainParams = TrainParams()
    service: ServiceSettings = ServiceSettings()
    baseline_letor: str | None = None

    def to_dict(self) -> dict:
        return {
            "resources": self.resources.__dict__,
            "lm": {
                "corpus": self.lm.corpus,
                "weights": list(self.lm.weights),
                "min_logprob": self.lm.min_logprob,
            },
            "data_dir": self.data_dir,
            "train": self.train.to_dict(),
            "service": self.service.__dict__,
            "baseline_letor": self.baseline_letor,
        }

    @classmethod
    def from_dict(cls, data: dict, base_dir: str | Path = ".") -> "AppConfig":
        base = Path(base_dir)

        def resolve(value: str | None) -> str | None:
            if value is None:
                return None
            path = Path(value)
            return str(path if path.is_absolute() else base / path)

        res = data["resources"]
        lm_data = data["lm"]
        return cls(
            resources=ResourcePaths(
                lexical_thesaurus=resolve(res["lexical_thesaurus"]),
                distributional_thesaurus=resolve(res["distributional_thesaurus"]),
                ppdb=resolve(res["ppdb"]),
                embeddings=resolve(res["embeddings"]),
                freq_simple_corpus=resolve(res["freq_simple_corpus"]),
                freq_web_corpus=resolve(res["freq_web_corpus"]),
                lemma_dict=resolve(res.get("lemma_dict")),
            ),
            lm=LmSettings(
                corpus=resolve(lm_data["corpus"]),
                weights=tuple(lm_data.get("weights", (0.6, 0.3, 0.1))),
                min_logprob=lm_data.get("min_logprob"),
            ),
            data_dir=resolve(data.get("data_dir", "data")),
            train=TrainParams.from_dict(data["train"]) if "train" in data else TrainParams(),
            service=ServiceSettings(**data.get("service", {})),
            baseline_letor=resolve(data.get("baseline_letor")),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "AppConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), base_dir=path.parent)

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

"""Line-based ranking dataset interchange.

Format, one item per line, grouped by query id:

    rel qid:<q> 1:<v> 2:<v> ... 14:<v> # <item_id>

Reals are written with six decimals; reading a written file reproduces the
original structure up to that quantization.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .groups import RankingGroup


def write_letor(groups: Sequence[RankingGroup], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for group in groups:
            for row, rel, item_id in zip(group.features, group.relevances, group.item_ids):
                feats = " ".join(f"{i + 1}:{v:.6f}" for i, v in enumerate(row))
                fh.write(f"{int(rel)} qid:{group.query_id} {feats} # {item_id}\n")


def read_letor(path: str | Path) -> list[RankingGroup]:
    order: list[str] = []
    rows: dict[str, list[tuple[int, list[float], str]]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            body, _, comment = line.partition("#")
            item_id = comment.strip()
            parts = body.split()
            if len(parts) < 2 or not parts[1].startswith("qid:"):
                raise ValueError(f"{path}:{lineno}: expected 'rel qid:<q> ...'")
            try:
                rel = int(parts[0])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad relevance {parts[0]!r}") from exc
            if rel < 0:
                raise ValueError(f"{path}:{lineno}: negative relevance")
            qid = parts[1][len("qid:") :]
            values: dict[int, float] = {}
            for chunk in parts[2:]:
                idx_str, sep, val_str = chunk.partition(":")
                if not sep:
                    raise ValueError(f"{path}:{lineno}: bad feature chunk {chunk!r}")
                try:
                    values[int(idx_str)] = float(val_str)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad feature {chunk!r}") from exc
            if not values:
                raise ValueError(f"{path}:{lineno}: no features")
            width = max(values)
            vector = [values.get(i, 0.0) for i in range(1, width + 1)]
            if qid not in rows:
                rows[qid] = []
                order.append(qid)
            rows[qid].append((rel, vector, item_id))

    groups = []
    for qid in order:
        items = rows[qid]
        width = max(len(v) for _, v, _ in items)
        features = np.array([v + [0.0] * (width - len(v)) for _, v, _ in items])
        groups.append(
            RankingGroup(
                query_id=qid,
                features=features,
                relevances=np.array([r for r, _, _ in items]),
                item_ids=[iid or f"{qid}.{i}" for i, (_, _, iid) in enumerate(items)],
            )
        )
    return groups

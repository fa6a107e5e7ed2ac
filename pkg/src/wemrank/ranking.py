"""Tie-aware importance rankings and their CSV/JSON serialisation."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class RankEntry:
    node: int
    score: float
    rank: int


@dataclass(frozen=True)
class ImportanceRanking:
    """Nodes ordered by descending score with competition ranks.

    Equal scores share a rank, and the next distinct score skips ahead by the
    size of the tie group.  Inside a tie group nodes are ordered by the
    optional secondary key (descending) and then by node index.
    """

    entries: tuple[RankEntry, ...]
    algorithm: str

    @classmethod
    def from_scores(
        cls,
        scores: Sequence[float],
        algorithm: str,
        secondary: Sequence[float] | None = None,
    ) -> "ImportanceRanking":
        scores = np.asarray(scores, dtype=np.float64)
        idx = np.arange(len(scores))
        if secondary is None:
            order = np.lexsort((idx, -scores))
        else:
            order = np.lexsort((idx, -np.asarray(secondary, dtype=np.float64), -scores))
        entries = []
        rank = 0
        prev = None
        for pos, i in enumerate(order.tolist(), start=1):
            s = float(scores[i])
            if s != prev:
                rank, prev = pos, s
            entries.append(RankEntry(i, s, rank))
        return cls(tuple(entries), algorithm)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def order(self) -> list[int]:
        return [e.node for e in self.entries]

    def scores_by_node(self) -> np.ndarray:
        out = np.empty(len(self.entries))
        for e in self.entries:
            out[e.node] = e.score
        return out

    def ranks_by_node(self) -> np.ndarray:
        out = np.empty(len(self.entries), dtype=np.int64)
        for e in self.entries:
            out[e.node] = e.rank
        return out

    def to_csv(self, labels: Sequence[str] | None = None, score_column: str = "score") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node", score_column, "rank"])
        for e in self.entries:
            w.writerow([labels[e.node] if labels else e.node, format_float(e.score), e.rank])
        return buf.getvalue()

    def to_json(self, labels: Sequence[str] | None = None) -> str:
        rows = [
            {"node": labels[e.node] if labels else e.node, "score": e.score, "rank": e.rank}
            for e in self.entries
        ]
        return json.dumps({"algorithm": self.algorithm, "entries": rows}, indent=2) + "\n"


def format_float(x: float) -> str:
    # repr is the shortest string that round-trips to the same double
    return repr(float(x))


def read_ranking_csv(text: str) -> list[tuple[str, float, int]]:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], rows[1:]
    if len(header) != 3 or header[0] != "node" or header[2] != "rank":
        raise ValueError(f"unexpected ranking header {header}")
    return [(r[0], float(r[1]), int(r[2])) for r in body]

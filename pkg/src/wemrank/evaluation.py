"""Ranking quality measures: dismantling robustness and Kendall rank correlation."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import WeightedGraph, connected_components
from .ranking import ImportanceRanking, format_float


class UndefinedCorrelationError(ValueError):
    pass


@dataclass(frozen=True)
class RobustnessCurve:
    """Connectivity after each removal; ``r[k]`` follows removal of ``removed[k]``."""

    removed: tuple[int, ...]
    r: tuple[float, ...]

    @property
    def R(self) -> float:
        return robustness_R(self)

    def to_csv(self, labels: Sequence[str] | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "removed_node", "r"])
        for step, (node, r) in enumerate(zip(self.removed, self.r), start=1):
            w.writerow([step, labels[node] if labels else node, format_float(r)])
        return buf.getvalue()


def _find(parent: list[int], x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def largest_component_sizes_after_removals(g: WeightedGraph, order: Sequence[int]) -> list[int]:
    """LCC size after each prefix of ``order`` has been deleted.

    Computed backwards: nodes are re-inserted in reverse removal order and
    merged with a union-find, which yields every intermediate LCC size in
    near-linear total time.
    """
    n = g.node_count
    parent = list(range(n))
    size = [1] * n
    present = [False] * n
    best = 0
    sizes = [0] * n  # sizes[k]: LCC after removing order[:k+1]
    for k in range(n - 1, -1, -1):
        sizes[k] = best
        v = order[k]
        present[v] = True
        best = max(best, 1)
        for j in g.indices[g.indptr[v]:g.indptr[v + 1]].tolist():
            if not present[j]:
                continue
            a, b = _find(parent, v), _find(parent, j)
            if a == b:
                continue
            if size[a] < size[b]:
                a, b = b, a
            parent[b] = a
            size[a] += size[b]
            best = max(best, size[a])
    return sizes


def connectivity_curve(g: WeightedGraph, ranking: ImportanceRanking | Sequence[int]) -> RobustnessCurve:
    """Delete nodes in ranking order, recording LCC size relative to the start."""
    order = ranking.order if isinstance(ranking, ImportanceRanking) else [int(i) for i in ranking]
    if sorted(order) != list(range(g.node_count)):
        raise ValueError("ranking must cover every node of the graph exactly once")
    if g.node_count == 0:
        return RobustnessCurve((), ())
    n_v = max(len(c) for c in connected_components(g))
    sizes = largest_component_sizes_after_removals(g, order)
    return RobustnessCurve(tuple(order), tuple(s / n_v for s in sizes))


def robustness_R(curve: RobustnessCurve) -> float:
    """Mean of r over all removal steps (one step per node)."""
    if not curve.r:
        return 0.0
    return math.fsum(curve.r) / len(curve.r)


def pair_counts(x: Sequence[float], y: Sequence[float]) -> tuple[int, int]:
    """Concordant and discordant pair counts; pairs tied in x or y count in neither."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be one-dimensional and of equal length")
    nc = nd = 0
    for i in range(len(x) - 1):
        s = np.sign(x[i + 1:] - x[i]) * np.sign(y[i + 1:] - y[i])
        nc += int(np.count_nonzero(s > 0))
        nd += int(np.count_nonzero(s < 0))
    return nc, nd


def _tied_pairs(values: np.ndarray) -> int:
    _, counts = np.unique(values, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def _check_pair(x, y) -> int:
    n = len(x)
    if n != len(y):
        raise ValueError("score vectors must have equal length")
    if n < 2:
        raise ValueError("need at least two observations")
    return n


def kendall_tau_a(x: Sequence[float], y: Sequence[float]) -> float:
    """2 (n_c - n_d) / (N (N - 1)), with no tie correction."""
    n = _check_pair(x, y)
    nc, nd = pair_counts(x, y)
    return 2 * (nc - nd) / (n * (n - 1))


def kendall_tau_b(x: Sequence[float], y: Sequence[float]) -> float:
    n = _check_pair(x, y)
    nc, nd = pair_counts(x, y)
    n0 = n * (n - 1) // 2
    n1 = _tied_pairs(np.asarray(x, dtype=np.float64))
    n2 = _tied_pairs(np.asarray(y, dtype=np.float64))
    if n1 == n0 or n2 == n0:
        raise UndefinedCorrelationError("tau-b is undefined when one sequence is entirely tied")
    if n1 == 0 and n2 == 0:
        return 2 * (nc - nd) / (n * (n - 1))
    return (nc - nd) / math.sqrt((n0 - n1) * (n0 - n2))

"""Weighted expected method (WEM) node scoring.

Edge weights are squeezed into open-interval probabilities, each node's
incident edges are treated as independent Bernoulli trials, and a node's
score aggregates the tail of the resulting degree distribution:

    C_i = sum_{c=1..deg(i)} c * Pr(deg(i) >= c)

The degree distribution is obtained by the usual O(d^2) Poisson-binomial
recurrence rather than by enumerating the 2^d possible worlds.
:func:`brute_force_tail` does the enumeration and is kept as a test oracle.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .graph import GraphError, WeightedGraph, average_weight
from .ranking import ImportanceRanking

BRUTE_FORCE_MAX_DEGREE = 20


class CorrelationMode(enum.Enum):
    """Whether a heavier edge means a stronger (POSITIVE) or weaker (NEGATIVE) tie."""

    POSITIVE = "positive"
    NEGATIVE = "negative"


class ProbabilityDomainError(ValueError):
    pass


class EnumerationLimitError(ValueError):
    pass


@dataclass(frozen=True)
class NormalizedWeightMap:
    """Per-edge probabilities aligned with ``g.edge_u`` / ``g.edge_v``."""

    values: np.ndarray
    mode: CorrelationMode
    w_min: float
    w_max: float
    avg_weight: float

    def transform(self, weights: np.ndarray) -> np.ndarray:
        return _squeeze(np.asarray(weights, dtype=np.float64), self.w_min, self.w_max, self.avg_weight, self.mode)


@dataclass(frozen=True)
class DegreeTailDistribution:
    node: int
    tail: np.ndarray  # tail[c-1] = Pr(deg >= c), c = 1..deg


def _squeeze(w, w_min, w_max, l, mode):
    lo = w_min - l
    x = (w - lo) / ((w_max + l) - lo)
    if mode is CorrelationMode.NEGATIVE:
        x = 1.0 - x
    return x


def normalize_weights(g: WeightedGraph, mode: CorrelationMode = CorrelationMode.POSITIVE) -> NormalizedWeightMap:
    """Map every edge weight into (0, 1).

    Positive mode: ``(w - (w_min - l)) / ((w_max + l) - (w_min - l))`` where
    ``l`` is the mean edge weight, so the extremes sit a distance ``l`` from
    the interval ends.  Negative mode is one minus that.
    """
    if g.edge_count == 0:
        raise GraphError("cannot normalise the weights of a graph without edges")
    mode = CorrelationMode(mode)
    w_min, w_max = float(g.edge_w.min()), float(g.edge_w.max())
    l = average_weight(g)
    values = _squeeze(g.edge_w, w_min, w_max, l, mode)
    values.setflags(write=False)
    return NormalizedWeightMap(values, mode, w_min, w_max, l)


def _check_probs(probs: np.ndarray) -> None:
    if probs.size and not np.all((probs > 0) & (probs < 1)):
        raise ProbabilityDomainError("incident probabilities must lie strictly inside (0, 1)")


def _dp_batch(P: np.ndarray) -> np.ndarray:
    """Exact degree distributions for each row of P (k nodes x d edges).

    Returns X with X[r, q] = Pr(row r keeps exactly q edges).  Only one row
    of the (p, q) table is alive at a time.
    """
    k, d = P.shape
    X = np.zeros((k, d + 1))
    X[:, 0] = 1.0
    for p in range(1, d + 1):
        x = P[:, p - 1:p]
        X[:, 1:p + 1] = X[:, 1:p + 1] * (1.0 - x) + X[:, 0:p] * x
        X[:, 0:1] = X[:, 0:1] * (1.0 - x)
    return X


def _tails_from_distribution(X: np.ndarray) -> np.ndarray:
    if X.shape[1] == 1:
        return np.zeros((X.shape[0], 0))
    # suffix sums over q = d, d-1, ..., c
    tails = np.cumsum(X[:, :0:-1], axis=1)[:, ::-1]
    return np.minimum(tails, 1.0)


def _scores_from_tails(tails: np.ndarray) -> np.ndarray:
    c = np.arange(1, tails.shape[1] + 1, dtype=np.float64)
    return (tails * c).sum(axis=1)


def dp_rows(incident_probs: Sequence[float]) -> Iterator[np.ndarray]:
    """Yield the rows X(p, .) for p = 0..deg, mainly for inspection and tests."""
    probs = np.asarray(incident_probs, dtype=np.float64)
    _check_probs(probs)
    row = np.zeros((1, len(probs) + 1))
    row[0, 0] = 1.0
    yield row[0, :1].copy()
    for p in range(1, len(probs) + 1):
        x = probs[p - 1:p].reshape(1, 1)
        row[:, 1:p + 1] = row[:, 1:p + 1] * (1.0 - x) + row[:, 0:p] * x
        row[:, 0:1] = row[:, 0:1] * (1.0 - x)
        yield row[0, :p + 1].copy()


def degree_tail_dp(node: int, incident_probs: Sequence[float]) -> DegreeTailDistribution:
    probs = np.asarray(incident_probs, dtype=np.float64)
    _check_probs(probs)
    tails = _tails_from_distribution(_dp_batch(probs.reshape(1, -1)))
    return DegreeTailDistribution(node, tails[0])


def brute_force_tail(node: int, incident_probs: Sequence[float]) -> DegreeTailDistribution:
    """Tail probabilities by summing over all 2^d possible worlds."""
    probs = np.asarray(incident_probs, dtype=np.float64)
    d = len(probs)
    if d > BRUTE_FORCE_MAX_DEGREE:
        raise EnumerationLimitError(f"degree {d} exceeds the enumeration limit of {BRUTE_FORCE_MAX_DEGREE}")
    _check_probs(probs)
    # row k of `kept` is the world whose kept edges are the set bits of k
    kept = ((np.arange(2**d)[:, None] >> np.arange(d)) & 1).astype(bool)
    world_pr = np.where(kept, probs, 1.0 - probs).prod(axis=1)
    exact = np.bincount(kept.sum(axis=1), weights=world_pr, minlength=d + 1)
    tail = np.array([exact[c:].sum() for c in range(1, d + 1)], dtype=np.float64)
    return DegreeTailDistribution(node, tail)


def wem_score(tail: DegreeTailDistribution | np.ndarray) -> float:
    t = tail.tail if isinstance(tail, DegreeTailDistribution) else np.asarray(tail, dtype=np.float64)
    if t.size == 0:
        return 0.0
    return float(_scores_from_tails(t.reshape(1, -1))[0])


def incident_probabilities(g: WeightedGraph, weights: NormalizedWeightMap, node: int) -> np.ndarray:
    """Probabilities of the node's edges, ordered by ascending neighbour index."""
    lo, hi = g.indptr[node], g.indptr[node + 1]
    return weights.transform(g.arc_weights[lo:hi])


def dp_cell_count(g: WeightedGraph) -> int:
    """Number of (p, q) cells the recurrence touches: sum_i d_i (d_i + 1) / 2."""
    d = g.degrees.astype(np.int64)
    return int((d * (d + 1) // 2).sum())


def _grouped_tails(g: WeightedGraph, mode: CorrelationMode, workers: int):
    """Yield ``(nodes, tails)`` per distinct positive degree.

    Nodes sharing a degree are pushed through the recurrence together; each
    node still sees exactly the same floating-point operations as it would
    alone, so results do not depend on grouping or on ``workers``.
    """
    weights = normalize_weights(g, mode)
    arc_probs = weights.transform(g.arc_weights)
    _check_probs(arc_probs)
    deg = g.degrees

    def run(d: int) -> tuple[np.ndarray, np.ndarray]:
        nodes = np.flatnonzero(deg == d)
        P = arc_probs[g.indptr[nodes][:, None] + np.arange(d)]
        return nodes, _tails_from_distribution(_dp_batch(P))

    groups = [int(d) for d in np.unique(deg) if d > 0]
    if workers > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(run, groups)
    else:
        yield from map(run, groups)


def degree_tails(
    g: WeightedGraph,
    mode: CorrelationMode = CorrelationMode.POSITIVE,
    workers: int = 1,
) -> list[DegreeTailDistribution]:
    out: list[DegreeTailDistribution] = [DegreeTailDistribution(i, np.zeros(0)) for i in range(g.node_count)]
    for nodes, tails in _grouped_tails(g, mode, workers):
        for i, t in zip(nodes.tolist(), tails):
            out[i] = DegreeTailDistribution(i, t)
    return out


def wem_scores(
    g: WeightedGraph,
    mode: CorrelationMode = CorrelationMode.POSITIVE,
    workers: int = 1,
) -> np.ndarray:
    """WEM score of every node; isolated nodes score 0."""
    scores = np.zeros(g.node_count)
    for nodes, tails in _grouped_tails(g, mode, workers):
        scores[nodes] = _scores_from_tails(tails)
    return scores


def wem_rank_all(
    g: WeightedGraph,
    mode: CorrelationMode = CorrelationMode.POSITIVE,
    workers: int = 1,
) -> ImportanceRanking:
    return ImportanceRanking.from_scores(wem_scores(g, mode, workers), "wem")

"""Comparison centralities: betweenness, closeness, eigenvector, w-core, weighted H-index.

Shortest-path measures traverse an edge of weight ``w`` at length ``1/w``:
heavier edges are stronger ties and so count as shorter.
"""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .graph import GraphError, WeightedGraph, is_connected
from .ranking import ImportanceRanking

# relative slack when deciding whether two path lengths are equal
PATH_RTOL = 1e-12


class ConvergenceError(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"power iteration did not converge in {iterations} iterations (residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


def edge_lengths(g: WeightedGraph) -> np.ndarray:
    return 1.0 / g.arc_weights


def _same_length(a: float, b: float) -> bool:
    return abs(a - b) <= PATH_RTOL * max(abs(a), abs(b))


def _dijkstra(g: WeightedGraph, lengths: np.ndarray, s: int):
    """Single-source shortest paths with path counts and predecessor lists."""
    n = g.node_count
    dist = [math.inf] * n
    sigma = [0.0] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    order = []
    dist[s] = 0.0
    sigma[s] = 1.0
    heap = [(0.0, s)]
    done = [False] * n
    indptr, indices = g.indptr, g.indices
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        order.append(u)
        for a in range(indptr[u], indptr[u + 1]):
            v = int(indices[a])
            if done[v]:
                continue
            nd = d + lengths[a]
            if dist[v] == math.inf or (nd < dist[v] and not _same_length(nd, dist[v])):
                dist[v] = nd
                sigma[v] = sigma[u]
                preds[v] = [u]
                heapq.heappush(heap, (nd, v))
            elif _same_length(nd, dist[v]):
                sigma[v] += sigma[u]
                preds[v].append(u)
    return order, dist, sigma, preds


def _require_connected(g: WeightedGraph, what: str) -> None:
    if not is_connected(g):
        raise GraphError(f"{what} requires a connected graph")


def _per_source(g: WeightedGraph, fn, workers: int) -> list:
    sources = range(g.node_count)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, sources))
    return [fn(s) for s in sources]


def betweenness_scores(g: WeightedGraph, workers: int = 1) -> np.ndarray:
    """Brandes accumulation; each unordered endpoint pair counted once."""
    lengths = edge_lengths(g).tolist()

    def dependency(s: int) -> np.ndarray:
        order, _, sigma, preds = _dijkstra(g, lengths, s)
        delta = np.zeros(g.node_count)
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
        delta[s] = 0.0
        return delta

    per_source = _per_source(g, dependency, workers)
    total = np.zeros(g.node_count)
    for delta in per_source:  # fixed source order keeps the sum reproducible
        total += delta
    return total / 2.0


def betweenness(g: WeightedGraph, workers: int = 1) -> ImportanceRanking:
    _require_connected(g, "betweenness")
    return ImportanceRanking.from_scores(betweenness_scores(g, workers), "bt")


def closeness_scores(g: WeightedGraph, workers: int = 1) -> np.ndarray:
    lengths = edge_lengths(g).tolist()
    n = g.node_count

    def close(s: int) -> float:
        _, dist, _, _ = _dijkstra(g, lengths, s)
        if any(math.isinf(d) for d in dist):
            raise GraphError("closeness is undefined on a disconnected graph")
        total = math.fsum(dist)
        return (n - 1) / total if total > 0 else 0.0

    return np.array(_per_source(g, close, workers), dtype=np.float64)


def closeness(g: WeightedGraph, workers: int = 1) -> ImportanceRanking:
    _require_connected(g, "closeness")
    return ImportanceRanking.from_scores(closeness_scores(g, workers), "cl")


def adjacency_matrix(g: WeightedGraph) -> np.ndarray:
    A = np.zeros((g.node_count, g.node_count))
    A[g.edge_u, g.edge_v] = g.edge_w
    A[g.edge_v, g.edge_u] = g.edge_w
    return A


def eigenvector_scores(g: WeightedGraph, tol: float = 1e-10, max_iter: int = 100_000) -> np.ndarray:
    """Leading eigenvector of the weighted adjacency matrix, unit Euclidean norm.

    Iterates with ``A + I`` instead of ``A``: the eigenvectors are the same,
    but the shift stops the iteration from oscillating on bipartite graphs,
    where ``-lambda_max`` is also an eigenvalue.  Stops once successive
    iterates differ by less than ``tol`` (max norm) and the eigen-residual
    ``|A v - lambda v|_inf`` is below ``tol`` as well.
    """
    A = adjacency_matrix(g)
    n = g.node_count
    v = np.full(n, 1.0 / math.sqrt(n))
    residual = math.inf
    for it in range(1, max_iter + 1):
        Av = A @ v
        nxt = Av + v
        nxt /= np.linalg.norm(nxt)
        step = float(np.max(np.abs(nxt - v)))
        v = nxt
        if step < tol:
            Av = A @ v
            residual = float(np.max(np.abs(Av - float(v @ Av) * v)))
            if residual < tol:
                return v
    raise ConvergenceError(max_iter, residual)


def eigenvector(g: WeightedGraph, tol: float = 1e-10, max_iter: int = 100_000) -> ImportanceRanking:
    _require_connected(g, "eigenvector centrality")
    return ImportanceRanking.from_scores(eigenvector_scores(g, tol, max_iter), "ec")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def w_core_shells(g: WeightedGraph) -> np.ndarray:
    """Shell index of each node under weighted degree round(sqrt(k * s)).

    Degree and strength are recomputed over the surviving graph after every
    removal.  All nodes whose weighted degree has dropped to the current
    shell are peeled off before the shell index is allowed to grow.
    """
    n = g.node_count
    k = g.degrees.astype(np.int64).tolist()
    s = g.strengths.tolist()
    alive = [True] * n
    shell = [0] * n
    remaining = n

    def wdeg(i: int) -> int:
        return _round_half_up(math.sqrt(k[i] * max(s[i], 0.0)))

    current = 0
    while remaining:
        current = max(current, min(wdeg(i) for i in range(n) if alive[i]))
        stack = [i for i in range(n) if alive[i] and wdeg(i) <= current]
        while stack:
            i = stack.pop()
            if not alive[i]:
                continue
            alive[i] = False
            remaining -= 1
            shell[i] = current
            for a in range(g.indptr[i], g.indptr[i + 1]):
                j = int(g.indices[a])
                if alive[j]:
                    k[j] -= 1
                    s[j] -= float(g.arc_weights[a])
                    if k[j] == 0:
                        s[j] = 0.0
                    if wdeg(j) <= current:
                        stack.append(j)
    return np.array(shell, dtype=np.float64)


def w_core(g: WeightedGraph) -> ImportanceRanking:
    return ImportanceRanking.from_scores(w_core_shells(g), "wc", secondary=g.strengths)


def h_operator(values) -> int:
    """Largest h such that at least h of the values are >= h."""
    vals = sorted(values, reverse=True)
    h = 0
    for i, x in enumerate(vals, start=1):
        if x >= i:
            h = i
        else:
            break
    return h


def weighted_h_index_scores(g: WeightedGraph) -> np.ndarray:
    s = g.strengths
    return np.array(
        [h_operator(s[g.indices[g.indptr[i]:g.indptr[i + 1]]].tolist()) for i in range(g.node_count)],
        dtype=np.float64,
    )


def weighted_h_index(g: WeightedGraph) -> ImportanceRanking:
    return ImportanceRanking.from_scores(weighted_h_index_scores(g), "hi", secondary=g.strengths)

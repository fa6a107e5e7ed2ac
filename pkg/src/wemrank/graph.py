"""Weighted undirected graph model, edge-list ingestion and basic statistics."""

from __future__ import annotations

import io
import logging
import math
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

log = logging.getLogger(__name__)

MERGE_POLICIES = ("error", "sum", "max", "first")

_SPLIT = re.compile(r"[\s,]+")


class GraphError(ValueError):
    pass


class EdgeListParseError(GraphError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class DuplicateEdgeError(GraphError):
    pass


class EmptyGraphError(GraphError):
    pass


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Immutable undirected graph with strictly positive edge weights.

    Edges are stored once per unordered pair as parallel arrays
    ``edge_u < edge_v`` sorted lexicographically.  The adjacency is kept in
    CSR form (``indptr``, ``indices``, ``arc_weights``) with each row sorted
    by neighbour index, which fixes the incident-edge order used by every
    algorithm in the package.
    """

    node_labels: tuple[str, ...]
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_w: np.ndarray
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    arc_weights: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(
        cls,
        node_count: int,
        edges: Iterable[tuple[int, int, float]],
        labels: Sequence[str] | None = None,
    ) -> "WeightedGraph":
        """Build a graph from ``(u, v, w)`` triples over nodes ``0..node_count-1``.

        Each unordered pair may appear only once; self-loops and non-positive
        weights are rejected.
        """
        if labels is None:
            labels = [str(i) for i in range(node_count)]
        if len(labels) != node_count:
            raise GraphError("label count does not match node count")
        if len(set(labels)) != node_count:
            raise GraphError("node labels must be unique")

        arr = np.asarray(edges if isinstance(edges, np.ndarray) else list(edges), dtype=np.float64)
        arr = arr.reshape(-1, 3)
        u, v, w = arr[:, 0], arr[:, 1], arr[:, 2].copy()
        if not (np.array_equal(u, np.floor(u)) and np.array_equal(v, np.floor(v))):
            raise GraphError("node indices must be integers")
        u, v = u.astype(np.int64), v.astype(np.int64)
        bad = (u < 0) | (u >= node_count) | (v < 0) | (v >= node_count)
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise GraphError(f"edge ({u[k]}, {v[k]}) references a node outside [0, {node_count})")
        if (u == v).any():
            raise GraphError(f"self-loop on node {u[u == v][0]}")
        bad = ~(np.isfinite(w) & (w > 0))
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise GraphError(f"edge ({u[k]}, {v[k]}) has non-positive or non-finite weight {w[k]!r}")

        eu, ev = np.minimum(u, v), np.maximum(u, v)
        order = np.lexsort((ev, eu))
        eu, ev, ew = eu[order], ev[order], w[order]
        dup = (eu[1:] == eu[:-1]) & (ev[1:] == ev[:-1])
        if dup.any():
            k = int(np.flatnonzero(dup)[0])
            raise DuplicateEdgeError(f"duplicate edge ({eu[k]}, {ev[k]})")

        # arcs in both directions, ordered by (source, target)
        src = np.concatenate([eu, ev])
        dst = np.concatenate([ev, eu])
        wts = np.concatenate([ew, ew])
        order = np.lexsort((dst, src))
        src, dst, wts = src[order], dst[order], wts[order]
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=node_count), out=indptr[1:])

        for arr in (eu, ev, ew, indptr, dst, wts):
            arr.setflags(write=False)
        return cls(tuple(labels), eu, ev, ew, indptr, dst, wts)

    @property
    def node_count(self) -> int:
        return len(self.node_labels)

    @property
    def edge_count(self) -> int:
        return len(self.edge_w)

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.edge_u.tolist(), self.edge_v.tolist(), self.edge_w.tolist()))

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def strengths(self) -> np.ndarray:
        s = np.zeros(self.node_count)
        np.add.at(s, self.arc_sources, self.arc_weights)
        return s

    @property
    def arc_sources(self) -> np.ndarray:
        return np.repeat(np.arange(self.node_count), self.degrees)

    @property
    def adjacency(self) -> list[list[tuple[int, float]]]:
        return [self.neighbors(i) for i in range(self.node_count)]

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return list(zip(self.indices[lo:hi].tolist(), self.arc_weights[lo:hi].tolist()))

    def index_of(self, label: str) -> int:
        try:
            return self.node_labels.index(label)
        except ValueError:
            raise KeyError(label) from None

    def subgraph(self, nodes: Iterable[int]) -> "WeightedGraph":
        """Induced subgraph, re-indexed densely in ascending original order."""
        keep = np.unique(np.fromiter((int(i) for i in nodes), dtype=np.int64))
        remap = np.full(self.node_count, -1, dtype=np.int64)
        remap[keep] = np.arange(len(keep))
        inside = (remap[self.edge_u] >= 0) & (remap[self.edge_v] >= 0)
        edges = np.column_stack(
            [remap[self.edge_u[inside]], remap[self.edge_v[inside]], self.edge_w[inside]]
        )
        return WeightedGraph.from_edges(len(keep), edges, [self.node_labels[i] for i in keep.tolist()])

    def to_networkx(self):
        import networkx as nx

        G = nx.Graph()
        G.add_nodes_from(range(self.node_count))
        G.add_weighted_edges_from(self.edges)
        return G


@dataclass(frozen=True)
class ParseReport:
    lines: int = 0
    self_loops: int = 0
    merged_duplicates: int = 0


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    avg_degree: float
    w_min: float
    w_max: float
    avg_weight: float
    k_mean: float
    k2_mean: float

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "avg_degree": self.avg_degree,
            "w_min": self.w_min,
            "w_max": self.w_max,
            "avg_weight": self.avg_weight,
            "k_mean": self.k_mean,
            "k2_mean": self.k2_mean,
        }


def parse_edge_list(
    source: TextIO | str,
    merge_policy: str = "error",
    comment: str = "#",
    delimiter: str | None = None,
    report: list | None = None,
) -> WeightedGraph:
    """Parse ``u v w`` lines into a :class:`WeightedGraph`.

    ``source`` is an open text stream or a string holding the edge list.
    Fields are separated by ``delimiter`` if given, otherwise by any run of
    whitespace and/or commas.  Labels are indexed in order of first
    appearance.  Self-loops are dropped and counted; duplicate pairs are
    resolved by ``merge_policy`` (``error``, ``sum``, ``max`` or ``first``).
    If ``report`` is a list, a :class:`ParseReport` is appended to it.
    """
    if merge_policy not in MERGE_POLICIES:
        raise ValueError(f"unknown merge policy {merge_policy!r}; expected one of {MERGE_POLICIES}")
    if isinstance(source, str):
        source = io.StringIO(source)

    index: dict[str, int] = {}
    weights: dict[tuple[int, int], float] = {}
    self_loops = merged = nlines = 0

    def node(label: str) -> int:
        if label not in index:
            index[label] = len(index)
        return index[label]

    for lineno, raw in enumerate(source, start=1):
        nlines = lineno
        line = raw.strip()
        if not line or line.startswith(comment):
            continue
        parts = line.split(delimiter) if delimiter else _SPLIT.split(line)
        parts = [p.strip() for p in parts if p.strip()]
        if len(parts) != 3:
            raise EdgeListParseError(lineno, f"expected 'u v w', got {len(parts)} field(s)")
        a, b, wtxt = parts
        try:
            w = float(wtxt)
        except ValueError:
            raise EdgeListParseError(lineno, f"unparseable weight {wtxt!r}") from None
        if not (math.isfinite(w) and w > 0):
            raise EdgeListParseError(lineno, f"weight must be a positive finite number, got {wtxt!r}")
        if a == b:
            self_loops += 1
            node(a)
            continue
        u, v = node(a), node(b)
        key = (u, v) if u < v else (v, u)
        if key in weights:
            if merge_policy == "error":
                raise DuplicateEdgeError(f"line {lineno}: duplicate edge {a!r}-{b!r}")
            merged += 1
            if merge_policy == "sum":
                weights[key] += w
            elif merge_policy == "max":
                weights[key] = max(weights[key], w)
            continue
        weights[key] = w

    if not weights:
        raise EmptyGraphError("edge list contains no edges")
    if self_loops:
        log.warning("dropped %d self-loop(s)", self_loops)
    if report is not None:
        report.append(ParseReport(nlines, self_loops, merged))

    # a node seen only on a self-loop line keeps its index but has no edges
    labels = sorted(index, key=index.get)
    return WeightedGraph.from_edges(len(labels), ((u, v, w) for (u, v), w in weights.items()), labels)


def read_edge_list(path: str | Path, **kwargs) -> WeightedGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh, **kwargs)


def format_edge_list(g: WeightedGraph) -> str:
    """One ``label_u label_v weight`` line per edge; weights round-trip exactly."""
    lab = g.node_labels
    return "".join(f"{lab[u]} {lab[v]} {w!r}\n" for u, v, w in g.edges)


def connected_components(g: WeightedGraph) -> list[list[int]]:
    """Components as sorted node lists, ordered by their smallest node."""
    seen = np.zeros(g.node_count, dtype=bool)
    comps = []
    for start in range(g.node_count):
        if seen[start]:
            continue
        seen[start] = True
        comp = [start]
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in g.indices[g.indptr[u]:g.indptr[u + 1]].tolist():
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    queue.append(v)
        comps.append(sorted(comp))
    return comps


def is_connected(g: WeightedGraph) -> bool:
    return g.node_count > 0 and len(connected_components(g)) == 1


def largest_connected_component(g: WeightedGraph) -> WeightedGraph:
    """Induced subgraph on the largest component.

    Among equally large components the one holding the smallest node index
    wins.  Returns ``g`` itself when it is already connected.
    """
    if g.node_count == 0:
        raise EmptyGraphError("graph has no nodes")
    comps = connected_components(g)
    if len(comps) == 1:
        return g
    # comps are ordered by smallest member, and max() keeps the first maximum
    best = max(comps, key=len)
    return g.subgraph(best)


def graph_stats(g: WeightedGraph) -> GraphStats:
    if g.node_count == 0:
        raise EmptyGraphError("graph has no nodes")
    n, m = g.node_count, g.edge_count
    k = g.degrees.astype(np.float64)
    if m:
        w_min, w_max = float(g.edge_w.min()), float(g.edge_w.max())
        avg_w = average_weight(g)
    else:
        w_min = w_max = avg_w = math.nan
    return GraphStats(
        n=n,
        m=m,
        avg_degree=2 * m / n,
        w_min=w_min,
        w_max=w_max,
        avg_weight=avg_w,
        k_mean=2 * m / n,
        k2_mean=float(np.dot(k, k) / n),
    )


def average_weight(g: WeightedGraph) -> float:
    """Mean edge weight, clamped into ``[w_min, w_max]`` against rounding."""
    w = g.edge_w
    lo, hi = float(w.min()), float(w.max())
    if lo == hi:
        return lo
    return min(max(math.fsum(w.tolist()) / len(w), lo), hi)

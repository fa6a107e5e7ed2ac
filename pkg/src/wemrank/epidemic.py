"""Discrete-time weighted SIR spreading and mean-field epidemic thresholds.

An infected node ``i`` exposes each susceptible neighbour ``j`` once per
infectious step with probability ``min(1, beta * w_ij)``.  Infection happens
first, then every node that was already infectious at the start of the step
recovers with probability ``recovery_prob``.

Randomness for one run is keyed by ``(rng_seed, seed_node, run_index)`` and
laid out per arc: a run draws one uniform ``u_a`` for every directed arc in
CSR order, followed (only when ``recovery_prob < 1``) by an infectious
period ``T_i ~ Geometric(recovery_prob)`` for every node.  The step at which
arc ``a = (i -> j)`` first transmits is the geometric inverse-CDF of
``u_a``, and the exposure succeeds iff that step falls inside ``T_i``.
Because a node transmits along an arc at most once, this fixes the whole run
and makes outbreak sizes monotone in ``beta`` for shared draws.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .graph import GraphError, GraphStats, WeightedGraph, graph_stats
from .ranking import ImportanceRanking


class DegenerateThresholdError(ValueError):
    pass


@dataclass(frozen=True)
class SirParams:
    beta: float
    recovery_prob: float = 1.0
    runs: int = 1000
    threshold_multiplier: float = 10.0
    rng_seed: int = 0

    def __post_init__(self):
        if not (self.beta >= 0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be a finite non-negative number, got {self.beta}")
        if not (0 < self.recovery_prob <= 1):
            raise ValueError(f"recovery_prob must lie in (0, 1], got {self.recovery_prob}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")

    @classmethod
    def from_threshold(
        cls,
        stats: GraphStats,
        threshold_multiplier: float = 10.0,
        **kwargs,
    ) -> "SirParams":
        """Parameters with ``beta = threshold_multiplier * weighted_threshold(stats)``."""
        if not threshold_multiplier > 0:
            raise ValueError("threshold multiplier must be positive")
        beta = threshold_multiplier * weighted_threshold(stats)
        return cls(beta=beta, threshold_multiplier=threshold_multiplier, **kwargs)


@dataclass(frozen=True)
class SirOutcome:
    seed_node: int
    outbreak_sizes: np.ndarray

    @property
    def mean_outbreak(self) -> float:
        return float(self.outbreak_sizes.mean())


def unweighted_threshold(stats: GraphStats) -> float:
    """Mean-field epidemic threshold <k> / (<k^2> - <k>)."""
    gap = stats.k2_mean - stats.k_mean
    if not gap > 0:
        raise DegenerateThresholdError(
            f"threshold undefined: <k^2> = {stats.k2_mean} does not exceed <k> = {stats.k_mean}"
        )
    return stats.k_mean / gap


def weighted_threshold(stats: GraphStats) -> float:
    """Weighted threshold: the unweighted one divided by the mean edge weight."""
    unweighted_threshold(stats)
    if not stats.avg_weight > 0:
        raise DegenerateThresholdError("mean edge weight must be positive")
    return stats.k_mean / (stats.avg_weight * (stats.k2_mean - stats.k_mean))


def run_rng(rng_seed: int, seed_node: int, run_index: int) -> np.random.Generator:
    return np.random.default_rng([rng_seed, seed_node, run_index])


def _draws(g: WeightedGraph, params: SirParams, seed_node: int, run_index: int):
    rng = run_rng(params.rng_seed, seed_node, run_index)
    u = rng.random(len(g.indices))
    if params.recovery_prob < 1:
        periods = rng.geometric(params.recovery_prob, size=g.node_count)
    else:
        periods = np.ones(g.node_count, dtype=np.int64)
    return u, periods


def transmission_probs(g: WeightedGraph, beta: float) -> np.ndarray:
    return np.minimum(1.0, beta * g.arc_weights)


def _first_success_step(u: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Geometric inverse CDF: the first trial at which an exposure succeeds.

    Step 1 is decided by the exact comparison ``u < p`` so that the
    single-step case never depends on logarithm rounding.
    """
    p = np.broadcast_to(p, u.shape)
    never = np.iinfo(np.int64).max
    steps = np.full(u.shape, never, dtype=np.int64)
    first = u < p
    steps[first] = 1
    later = ~first & (p > 0)
    if np.any(later):
        # smallest k with 1 - (1-p)^k > u
        k = np.floor(np.log1p(-u[later]) / np.log1p(-p[later])) + 1
        steps[later] = np.clip(k, 2, never // 2).astype(np.int64)
    return steps


def simulate_wsir(g: WeightedGraph, seed_node: int, params: SirParams, run_index: int) -> int:
    """One synchronous SIR run from ``seed_node``; returns the final number recovered."""
    if not 0 <= seed_node < g.node_count:
        raise GraphError(f"seed node {seed_node} is not in the graph")
    u, periods = _draws(g, params, seed_node, run_index)
    steps = _first_success_step(u, transmission_probs(g, params.beta))

    n = g.node_count
    SUS, INF, REC = 0, 1, 2
    state = [SUS] * n
    age = [0] * n  # completed infectious steps
    state[seed_node] = INF
    infected = [seed_node]
    indptr, indices = g.indptr, g.indices
    while infected:
        newly = []
        for i in infected:
            step = age[i] + 1
            for a in range(indptr[i], indptr[i + 1]):
                j = int(indices[a])
                if state[j] == SUS and steps[a] == step:
                    state[j] = INF
                    newly.append(j)
        still = []
        for i in infected:
            age[i] += 1
            if age[i] >= periods[i]:
                state[i] = REC
            else:
                still.append(i)
        infected = still + newly
    return sum(1 for s in state if s == REC)


def _open_arcs(g: WeightedGraph, params: SirParams, seed_node: int, p: np.ndarray):
    """Boolean (runs x arcs) matrix of arcs that transmit if their source is ever infected."""
    src = g.arc_sources
    out = np.empty((params.runs, len(g.indices)), dtype=bool)
    for r in range(params.runs):
        u, periods = _draws(g, params, seed_node, r)
        if params.recovery_prob < 1:
            out[r] = _first_success_step(u, p) <= periods[src]
        else:
            out[r] = u < p
    return out


def outbreak_sizes(g: WeightedGraph, seed_node: int, params: SirParams) -> np.ndarray:
    """Final outbreak size of every run for one seed, all runs advanced together.

    The final recovered set of a run is the set reachable from the seed over
    arcs that transmit, so the runs are evaluated as a breadth-first search
    in lock-step rather than step by step.
    """
    p = transmission_probs(g, params.beta)
    n = g.node_count
    # regroup arcs by target so each node's incoming arcs form one contiguous block
    by_target = np.argsort(g.indices, kind="stable")
    opened = _open_arcs(g, params, seed_node, p)[:, by_target]
    src = g.arc_sources[by_target]
    has_in = g.degrees > 0
    starts = g.indptr[:-1][has_in]  # in-degree equals degree
    reached = np.zeros((params.runs, n), dtype=bool)
    reached[:, seed_node] = True
    frontier = reached.copy()
    while frontier.any():
        active = frontier[:, src] & opened
        hit = np.zeros_like(reached)
        if len(starts):
            hit[:, has_in] = np.logical_or.reduceat(active, starts, axis=1)
        frontier = hit & ~reached
        reached |= frontier
    return reached.sum(axis=1).astype(np.int64)


def sir_outcome(g: WeightedGraph, seed_node: int, params: SirParams) -> SirOutcome:
    return SirOutcome(seed_node, outbreak_sizes(g, seed_node, params))


def sir_outcomes(g: WeightedGraph, params: SirParams, workers: int = 1) -> list[SirOutcome]:
    nodes = range(g.node_count)
    fn = lambda i: sir_outcome(g, i, params)  # noqa: E731
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, nodes))
    return [fn(i) for i in nodes]


def sir_ground_truth(
    g: WeightedGraph,
    params: SirParams,
    workers: int = 1,
    outcomes: list[SirOutcome] | None = None,
) -> ImportanceRanking:
    """Rank nodes by mean outbreak size when seeding the epidemic there."""
    if outcomes is None:
        outcomes = sir_outcomes(g, params, workers)
    return ImportanceRanking.from_scores([o.mean_outbreak for o in outcomes], "wsir")


def default_params(g: WeightedGraph, **kwargs) -> SirParams:
    return SirParams.from_threshold(graph_stats(g), **kwargs)

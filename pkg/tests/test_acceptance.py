"""Exit criteria for the package, one test per criterion.

Each test records a PASS/FAIL line that is echoed in the terminal summary.
"""

import contextlib
import filecmp
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wemrank.baselines import betweenness, w_core
from wemrank.cli import main
from wemrank.epidemic import SirParams, outbreak_sizes, sir_ground_truth
from wemrank.evaluation import connectivity_curve, kendall_tau_a, kendall_tau_b, pair_counts
from wemrank.graph import WeightedGraph, graph_stats
from wemrank.wem import (
    CorrelationMode,
    brute_force_tail,
    degree_tail_dp,
    degree_tails,
    dp_cell_count,
    incident_probabilities,
    normalize_weights,
    wem_rank_all,
    wem_score,
    wem_scores,
)

from conftest import ACCEPTANCE, complete_graph, path_graph, random_graph, star_graph

REFERENCE_LESMIS_R_WEM = 0.151


@contextlib.contextmanager
def criterion(number, title):
    detail = {}
    start = time.perf_counter()
    try:
        yield detail
    except BaseException:
        ACCEPTANCE.append(f"[FAIL] {number:>2}. {title} {detail.get('info', '')}".rstrip())
        raise
    elapsed = time.perf_counter() - start
    ACCEPTANCE.append(f"[PASS] {number:>2}. {title} ({elapsed:.2f}s) {detail.get('info', '')}".rstrip())


def test_01_oracle_equivalence():
    with criterion(1, "DP tails match possible-world enumeration") as info:
        start = time.perf_counter()
        rng = np.random.default_rng(1)
        worst_tail = worst_score = 0.0
        nodes = max_deg = 0
        for _ in range(50):
            n = int(rng.integers(2, 61))
            g = random_graph(rng, n, p=float(rng.uniform(0.05, 0.4)), max_degree=12, wmax=10.0)
            if g.edge_count == 0:
                continue
            wmap = normalize_weights(g, CorrelationMode.POSITIVE)
            batched = wem_scores(g)
            for i in range(n):
                ps = incident_probabilities(g, wmap, i)
                dp = degree_tail_dp(i, ps)
                bf = brute_force_tail(i, ps)
                worst_tail = max(worst_tail, float(np.max(np.abs(dp.tail - bf.tail), initial=0.0)))
                worst_score = max(worst_score, abs(wem_score(dp) - wem_score(bf)), abs(batched[i] - wem_score(bf)))
                nodes += 1
                max_deg = max(max_deg, len(ps))
        elapsed = time.perf_counter() - start
        info["info"] = f"nodes={nodes} max_deg={max_deg} tail_err={worst_tail:.1e} score_err={worst_score:.1e}"
        assert max_deg == 12
        assert worst_tail < 1e-12
        assert worst_score < 1e-12
        assert elapsed < 10


def heavy_tailed_graph(n, m_target, seed):
    """Random simple graph with a power-law-ish degree sequence."""
    rng = np.random.default_rng(seed)
    fitness = (1 - rng.random(n)) ** -0.8
    p = fitness / fitness.sum()
    u = rng.choice(n, size=int(m_target * 1.5), p=p)
    v = rng.choice(n, size=int(m_target * 1.5), p=p)
    keep = u != v
    pairs = np.unique(np.sort(np.column_stack([u[keep], v[keep]]), axis=1), axis=0)
    pairs = pairs[rng.permutation(len(pairs))[:m_target]]
    w = 10 * (1 - rng.random(len(pairs)))
    return WeightedGraph.from_edges(n, np.column_stack([pairs, w]))


def test_02_expected_degree_identity():
    with criterion(2, "sum of tail = sum of incident probabilities") as info:
        worst = 0.0
        for n, m in ((500, 2_000), (20_000, 100_000)):
            g = heavy_tailed_graph(n, m, seed=n)
            for mode in CorrelationMode:
                wmap = normalize_weights(g, mode)
                probs = wmap.transform(g.arc_weights)
                expected = np.add.reduceat(probs, g.indptr[:-1][g.degrees > 0])
                tails = degree_tails(g, mode)
                got = np.array([t.tail.sum() for t in tails if t.tail.size])
                worst = max(worst, float(np.max(np.abs(got - expected))))
        info["info"] = f"m=1e5 max_deg={int(g.degrees.max())} err={worst:.1e}"
        assert g.edge_count == 100_000
        assert worst < 1e-9


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(1, 10**6), min_size=1, max_size=40))
def normalization_property(ints):
    ws = [i / 100 for i in ints]
    g = star_graph(ws)
    pos = normalize_weights(g, CorrelationMode.POSITIVE).values
    neg = normalize_weights(g, CorrelationMode.NEGATIVE).values
    assert np.all((pos > 0) & (pos < 1)) and np.all((neg > 0) & (neg < 1))
    assert np.all(np.abs(pos + neg - 1.0) <= 2**-52)
    order = np.argsort(g.edge_w, kind="stable")
    w, p, q = g.edge_w[order], pos[order], neg[order]
    strict = w[1:] > w[:-1]
    assert np.all(p[1:][strict] > p[:-1][strict])
    assert np.all(q[1:][strict] < q[:-1][strict])
    assert np.all(p[1:][~strict] == p[:-1][~strict])


def test_03_normalization_contract():
    with criterion(3, "normalisation inside (0,1), monotone, dual, uniform -> 1/2"):
        normalization_property()
        for w in (0.1, 1.0, 5.0, 7.77, 1e5):
            for mode in CorrelationMode:
                assert normalize_weights(star_graph([w] * 4), mode).values.tolist() == [0.5] * 4


def test_04_hand_values():
    with criterion(4, "hand-derived values"):
        assert normalize_weights(star_graph([1, 2, 3])).values.tolist() == [1 / 3, 1 / 2, 2 / 3]
        t = degree_tail_dp(0, [0.5, 0.5])
        assert t.tail.tolist() == [0.75, 0.25]
        assert wem_score(t) == 1.25
        k4 = connectivity_curve(complete_graph(4), wem_rank_all(complete_graph(4)))
        assert abs(k4.R - 0.375) < 1e-12
        p3 = connectivity_curve(path_graph([1, 1]), [1, 0, 2])
        assert abs(p3.R - 2 / 9) < 1e-12


def brute_counts(x, y):
    nc = nd = 0
    n = len(x)
    for s in range(n):
        xs, ys = x[s], y[s]
        for t in range(s + 1, n):
            a = (xs > x[t]) - (xs < x[t])
            b = (ys > y[t]) - (ys < y[t])
            if a * b > 0:
                nc += 1
            elif a * b < 0:
                nd += 1
    return nc, nd


def test_05_kendall_correctness():
    with criterion(5, "Kendall tau-a/tau-b vs brute-force pair counter") as info:
        rng = np.random.default_rng(5)
        for k in range(100):
            n = int(rng.integers(2, 501))
            levels = int(rng.integers(1, max(2, n // 3)))
            x = rng.integers(0, levels + 1, size=n).tolist()
            y = rng.integers(0, levels + 1, size=n).tolist()
            nc, nd = brute_counts(x, y)
            assert pair_counts(x, y) == (nc, nd)
            assert kendall_tau_a(x, y) == 2 * (nc - nd) / (n * (n - 1))
            if len(set(x)) > 1 and len(set(y)) > 1:
                n0 = n * (n - 1) // 2
                n1 = sum(c * (c - 1) // 2 for c in np.unique(x, return_counts=True)[1].tolist())
                n2 = sum(c * (c - 1) // 2 for c in np.unique(y, return_counts=True)[1].tolist())
                expected = 2 * (nc - nd) / (n * (n - 1)) if n1 == n2 == 0 else (nc - nd) / math.sqrt((n0 - n1) * (n0 - n2))
                assert kendall_tau_b(x, y) == expected
        assert kendall_tau_a([1, 2, 3, 4], [1, 3, 2, 4]) == 2 / 3
        info["info"] = "100 tied inputs, N<=500"


def test_06_lesmis_robustness(lesmis):
    with criterion(6, "Les Miserables robustness: R(WEM) < R(WC), |R(WEM) - 0.151| <= 0.05") as info:
        start = time.perf_counter()
        r_wem = connectivity_curve(lesmis, wem_rank_all(lesmis)).R
        r_wc = connectivity_curve(lesmis, w_core(lesmis)).R
        elapsed = time.perf_counter() - start
        info["info"] = f"R_wem={r_wem:.4f} R_wc={r_wc:.4f}"
        assert (lesmis.node_count, lesmis.edge_count) == (77, 254)
        assert r_wem < r_wc
        assert abs(r_wem - REFERENCE_LESMIS_R_WEM) <= 0.05
        assert elapsed < 5


def test_07_lesmis_sir_correlation(lesmis):
    with criterion(7, "Les Miserables WSIR: tau_b(WEM) - tau_b(BT) >= 0.3") as info:
        start = time.perf_counter()
        params = SirParams.from_threshold(graph_stats(lesmis), threshold_multiplier=10.0, runs=1000, rng_seed=0)
        truth = sir_ground_truth(lesmis, params).scores_by_node()
        tau_wem = kendall_tau_b(wem_rank_all(lesmis).scores_by_node(), truth)
        tau_bt = kendall_tau_b(betweenness(lesmis).scores_by_node(), truth)
        elapsed = time.perf_counter() - start
        info["info"] = f"tau_wem={tau_wem:.3f} tau_bt={tau_bt:.3f} beta={params.beta:.4f}"
        assert tau_wem - tau_bt >= 0.3
        assert elapsed < 60


def fixed_degree_graph(n, seed):
    """Configuration-model graph whose degrees are drawn i.i.d. from {2..16}."""
    rng = np.random.default_rng(seed)
    deg = rng.integers(2, 17, size=n)
    stubs = np.repeat(np.arange(n), deg)
    rng.shuffle(stubs)
    if len(stubs) % 2:
        stubs = stubs[:-1]
    pairs = stubs.reshape(-1, 2)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    w = 10 * (1 - rng.random(len(pairs)))
    return WeightedGraph.from_edges(n, np.column_stack([pairs, w]))


def best_time(fn, repeats=7):
    best = math.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def test_08_linear_scaling():
    with criterion(8, "doubling m scales WEM time by 1.5-2.8x") as info:
        small = fixed_degree_graph(100_000, 8)
        large = fixed_degree_graph(200_000, 9)
        t_small = best_time(lambda: wem_scores(small))
        t_large = best_time(lambda: wem_scores(large))
        ratio = t_large / t_small
        m_ratio = large.edge_count / small.edge_count
        work_ratio = dp_cell_count(large) / dp_cell_count(small)
        info["info"] = f"m={small.edge_count}->{large.edge_count} time_ratio={ratio:.2f} work_ratio={work_ratio:.2f}"
        assert 1.9 < m_ratio < 2.1
        for g in (small, large):
            assert dp_cell_count(g) <= int(g.degrees.max()) * 2 * g.edge_count
        assert 1.5 <= ratio <= 2.8


def test_09_simulation_sanity(lesmis):
    with criterion(9, "SIR: beta=0 -> 1, saturating beta -> n, single edge mean 1.5") as info:
        zero = sir_ground_truth(lesmis, SirParams(beta=0.0, runs=50))
        assert all(e.score == 1.0 for e in zero.entries)
        full = sir_ground_truth(lesmis, SirParams(beta=1.0 / lesmis.edge_w.min(), runs=50))
        assert all(e.score == lesmis.node_count for e in full.entries)
        edge = WeightedGraph.from_edges(2, [(0, 1, 4.0)])
        sizes = outbreak_sizes(edge, 0, SirParams(beta=0.125, runs=10_000, rng_seed=9))
        se = sizes.std(ddof=1) / math.sqrt(len(sizes))
        info["info"] = f"single-edge mean={sizes.mean():.4f} se={se:.4f}"
        assert abs(sizes.mean() - 1.5) < 3 * se


def test_10_determinism(tmp_path):
    with criterion(10, "byte-identical outputs at 1, 4 and 8 workers"):
        commands = [
            ["rank", "bundled:lesmis"],
            ["robustness", "bundled:lesmis"],
            ["sir-eval", "bundled:lesmis", "--tau-a", "--dump-runs"],
        ]
        for cmd in commands:
            dirs = []
            for workers in (1, 4, 8, 1):
                out = tmp_path / f"{cmd[0]}_{workers}_{len(dirs)}"
                assert main(cmd + ["--workers", str(workers), "--seed", "2024", "--out-dir", str(out)]) == 0
                dirs.append(out)
            names = sorted(p.name for p in dirs[0].iterdir())
            assert names
            for other in dirs[1:]:
                assert sorted(p.name for p in other.iterdir()) == names
                match, mismatch, errors = filecmp.cmpfiles(dirs[0], other, names, shallow=False)
                assert not mismatch and not errors

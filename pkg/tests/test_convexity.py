from __future__ import annotations

import itertools
import warnings
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from convskel.convexity import (
    DisconnectedGraphError,
    c_centrality,
    ccore_profile,
    convex_hull,
    expansion_run,
    is_convex,
    measure_convexity,
    measure_corrected,
    pendant_bound,
)
from convskel.ensembles import gen_convex, gen_core_periphery, gen_er, gen_random_tree
from convskel.graph import Graph, largest_component

from conftest import brute_hull, connected_subsets, floyd, graphs, random_graph


def complete(n):
    return Graph(n, list(itertools.combinations(range(n), 2)))


def star(n):
    return Graph(n, [(0, i) for i in range(1, n)])


def two_star():
    # two hubs joined by an edge, each with three leaves
    return Graph(8, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 5), (1, 6), (1, 7)])


# hulls


def test_hull_examples():
    p4 = Graph(4, [(0, 1), (1, 2), (2, 3)])
    assert convex_hull(p4, {0, 3}) == {0, 1, 2, 3}
    c4 = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert convex_hull(c4, {0, 2}) == {0, 1, 2, 3}
    assert convex_hull(c4, {0, 1}) == {0, 1}


def test_two_star_triplets_match_oracle():
    g = two_star()
    for sub in connected_subsets(g, 3):
        if len(sub) == 3:
            assert convex_hull(g, sub) == brute_hull(g, sub)
    # leaves on both sides force every geodesic through both hubs
    assert convex_hull(g, {2, 0, 1}) == {0, 1, 2}
    assert convex_hull(g, {2, 5}) == {0, 1, 2, 5}


def test_hull_across_components_rejected():
    g = Graph(4, [(0, 1), (2, 3)])
    with pytest.raises(DisconnectedGraphError):
        convex_hull(g, {0, 2})
    assert convex_hull(g, {2, 3}) == {2, 3}


def test_hull_oracle_small_random_graphs():
    rng = np.random.default_rng(11)
    mismatches = 0
    for _ in range(30):
        n = int(rng.integers(2, 10))
        g = random_graph(rng, n, float(rng.uniform(0.2, 0.7)))
        d = floyd(g)
        for sub in connected_subsets(g, 3):
            mismatches += convex_hull(g, sub) != brute_hull(g, sub, d)
    assert mismatches == 0


@settings(max_examples=150, deadline=None)
@given(graphs(min_n=2, max_n=10, connected=True), st.data())
def test_hull_properties(g, data):
    s = data.draw(st.sets(st.integers(0, g.n - 1), min_size=1, max_size=4))
    t = s | data.draw(st.sets(st.integers(0, g.n - 1), max_size=3))
    h = convex_hull(g, s)
    assert convex_hull(g, h) == h
    assert h <= convex_hull(g, t)
    assert h >= s
    assert is_convex(g, h)


# expansion runs


@pytest.mark.parametrize("g", [star(12), complete(9), gen_random_tree(40, 2), gen_convex(120, 0.3, 4)],
                         ids=["star", "complete", "tree", "tree-of-cliques"])
def test_fully_convex_grow_one_node_per_step(g):
    for run in range(20):
        tr = expansion_run(g, seed=5, run=run)
        assert tr.sizes.tolist() == list(range(1, g.n + 1))
        assert tr.convexity == 1.0
    assert measure_convexity(g, runs=20, seed=1).X == 1.0


def test_c4_convexity_exact():
    # any start -> one neighbour (pair, convex) -> any third node closes the square
    c4 = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    rep = measure_convexity(c4, runs=50, seed=3)
    assert rep.X == 0.75
    assert np.all(rep.run_X == 0.75)


def _exact_set_distribution(g, steps):
    """Exact law of the expansion set after ``steps`` steps (brute-force Markov chain)."""
    d = floyd(g)
    law = {frozenset([v]): Fraction(1, g.n) for v in range(g.n)}
    for _ in range(steps):
        nxt: dict[frozenset, Fraction] = Counter()
        for s, p in law.items():
            weights = {i: sum(1 for j in g.adj[i] if j in s) for i in range(g.n) if i not in s}
            weights = {i: w for i, w in weights.items() if w}
            total = sum(weights.values())
            if not total:
                nxt[s] += p
                continue
            for i, w in weights.items():
                nxt[brute_hull(g, s | {i}, d)] += p * Fraction(w, total)
        law = nxt
    return law


def test_expansion_law_matches_exact_chain():
    # a triangle with a tail and a square: boundary weights differ between candidates
    g = Graph(7, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (3, 6)])
    law = _exact_set_distribution(g, 2)
    draws = 6000
    seen = Counter(expansion_run(g, seed=17, run=r, max_steps=2).members(2) for r in range(draws))
    keys = sorted(law, key=sorted)
    assert set(seen) <= set(keys)
    observed = [seen[k] for k in keys]
    expected = [float(law[k]) * draws for k in keys]
    assert chisquare(observed, expected).pvalue > 1e-4


def test_trace_sets_are_convex():
    g = random_graph(np.random.default_rng(3), 30, 0.15)
    for run in range(5):
        tr = expansion_run(g, seed=2, run=run)
        for t in range(0, g.n, 3):
            s = tr.members(t)
            if len(s) == g.n:
                break
            assert convex_hull(g, s) == s
            assert tr.sizes[t] >= t + 1


def test_expansion_rejects_disconnected():
    g = Graph(4, [(0, 1), (2, 3)])
    with pytest.raises(DisconnectedGraphError):
        measure_convexity(g, runs=2)


def test_deterministic_and_thread_independent():
    g, _ = largest_component(gen_er(80, 5, 3))
    a = measure_convexity(g, runs=30, seed=9)
    b = measure_convexity(g, runs=30, seed=9, jobs=3)
    assert a.X == b.X and np.array_equal(a.run_X, b.run_X) and np.array_equal(a.mean_trace, b.mean_trace)
    assert measure_convexity(g, runs=30, seed=10).X != a.X


def test_er_convexity_low():
    g = gen_er(225, 10, 1)
    rep = measure_convexity(g, runs=50, seed=1)
    assert 0.01 <= rep.X <= 0.05
    assert rep.mean_trace[5] >= 0.95
    assert rep.X >= rep.pendant_bound - rep.ci99


def test_report_fields():
    rep = measure_convexity(gen_random_tree(30, 1), runs=5, seed=0)
    d = rep.to_dict(trace=True)
    for key in ("n", "m", "runs", "X", "Xs", "s", "pendant_bound", "ci99", "trace"):
        assert key in d
    assert d["X"] == d["X_cover"] == 1.0
    assert len(d["trace"]) == 30


# corrected convexity


def test_corrected_connected_equals_plain():
    g, _ = largest_component(gen_er(60, 6, 2))
    assert measure_corrected(g, runs=10, seed=1).Xs == measure_convexity(g, runs=10, seed=1).X


def test_corrected_tree_component():
    tree = [(i, i + 1) for i in range(7)]
    g = Graph(10, tree + [(8, 9)])
    rep = measure_corrected(g, runs=10, seed=1)
    assert rep.X == 1.0
    assert rep.Xs == pytest.approx(0.8)


def test_corrected_warns_on_small_component():
    g = Graph(6, [(0, 1), (2, 3), (4, 5)])
    with pytest.warns(UserWarning):
        measure_corrected(g, runs=2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        measure_corrected(gen_random_tree(10, 0), runs=2)


def test_pendant_bound():
    assert pendant_bound(star(9)) == pytest.approx(8 / 9)
    assert pendant_bound(Graph(3, [(0, 1), (1, 2)])) == pytest.approx(2 / 3)
    g = gen_core_periphery(400, 0.4, 0.1, 0.02, seed=3)
    assert pendant_bound(g) == int(np.sum(g.degrees == 1)) / g.n


# c-core


def test_c_centrality_formula():
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (1, 3)])
    p = np.array([0.1, 0.5, 1.0, 0.25])
    expect = [-g.degrees[i] + 2 * sum(p[j] for j in g.adj[i]) for i in range(4)]
    assert np.allclose(c_centrality(g, p), expect)
    assert np.array_equal(c_centrality(g, np.ones(4)), g.degrees)


def test_ccore_star_hub_always_in():
    prof = ccore_profile(star(50), runs=40, t_threshold=15, seed=2)
    assert prof.p[0] == 1.0
    assert prof.core[0]


def test_ccore_dense_er_full():
    g = gen_er(40, 30, 1)
    prof = ccore_profile(g, runs=20, t_threshold=15, seed=2)
    assert np.all(prof.p == 1.0)
    assert np.array_equal(prof.c, g.degrees)


def test_ccore_convex_graph_has_empty_core():
    g = gen_convex(1000, 0.25, 1)
    prof = ccore_profile(g, runs=50, t_threshold=15, seed=1)
    assert not prof.core.any()


def test_ccore_errors():
    with pytest.raises(ValueError):
        ccore_profile(star(10), runs=2, t_threshold=10)
    with pytest.raises(DisconnectedGraphError):
        ccore_profile(Graph(20, [(0, 1)]), runs=2, t_threshold=3)


def test_ccore_fraction_granularity():
    g = gen_er(50, 4, 5)
    if not g.is_connected:
        pytest.skip("instance disconnected")
    prof = ccore_profile(g, runs=16, t_threshold=5, seed=1)
    assert np.all(np.isclose(prof.p * 16, np.round(prof.p * 16)))

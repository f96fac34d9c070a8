from __future__ import annotations

import itertools
from collections import Counter

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from convskel.convexity import DisconnectedGraphError, measure_convexity
from convskel.ensembles import gen_convex, gen_er, gen_random_tree
from convskel.graph import Graph, clustering, triangles
from convskel.skeleton import _Working, skeleton_ccentrality, skeleton_clustering, spanning_tree

from conftest import graphs, random_graph


def complete(n):
    return Graph(n, list(itertools.combinations(range(n), 2)))


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(map(tuple, g.edges.tolist()))
    return h


def brute_delta_c(g, u, v):
    h = to_nx(g)
    before = nx.clustering(h)
    h.remove_edge(u, v)
    after = nx.clustering(h)
    return (after[u] - before[u]) + (after[v] - before[v])


# spanning trees


def test_spanning_tree_basic():
    tree = gen_random_tree(30, 4)
    assert spanning_tree(tree, 1).edge_set() == tree.edge_set()
    g = random_graph(np.random.default_rng(2), 40, 0.2)
    t = spanning_tree(g, 7)
    assert t.m == g.n - 1 and t.is_connected
    assert t.edge_set() <= g.edge_set()
    assert clustering(t).mean() == 0
    assert measure_convexity(t, runs=10).X == 1.0
    assert t.labels == g.labels


def test_spanning_tree_rejects_disconnected():
    with pytest.raises(DisconnectedGraphError):
        spanning_tree(Graph(4, [(0, 1), (2, 3)]), 0)


@pytest.mark.parametrize("g, count", [(Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)]), 4), (complete(4), 16)],
                         ids=["C4", "K4"])
def test_spanning_tree_uniform(g, count):
    draws = 4000
    seen = Counter(frozenset(spanning_tree(g, s).edge_set()) for s in range(draws))
    assert len(seen) == count
    assert chisquare(list(seen.values())).pvalue > 1e-4


# clustering-change scores


@settings(max_examples=100, deadline=None)
@given(graphs(min_n=2, max_n=10))
def test_delta_c_matches_brute_force(g):
    work = _Working(g)
    for u, v in g.edges.tolist():
        assert work.delta_c(u, v) == pytest.approx(brute_delta_c(g, u, v), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(graphs(min_n=3, max_n=12), st.randoms(use_true_random=False))
def test_incremental_triangles(g, rnd):
    work = _Working(g)
    edges = g.edges.tolist()
    rnd.shuffle(edges)
    for u, v in edges[: len(edges) // 2]:
        bridge = work.is_bridge(u, v)
        before = nx.number_connected_components(to_nx(g.with_edges(sorted(work.edges))))
        work.remove(u, v)
        cur = g.with_edges(sorted(work.edges))
        assert bridge == (nx.number_connected_components(to_nx(cur)) > before)
        assert np.array_equal(work.tri, triangles(cur))
        assert np.allclose(work.clustering(), clustering(cur), atol=1e-12)


def test_k4_scores_zero_and_stop_immediately():
    g = complete(4)
    work = _Working(g)
    for u, v in g.edges.tolist():
        # both endpoints keep clustering 1 after the removal
        assert work.delta_c(u, v) == brute_delta_c(g, u, v) == 0
    res = skeleton_clustering(g, checkpoint_runs=2)
    assert res.graph.edge_set() == g.edge_set()
    assert res.removals == []


def test_tree_input_untouched():
    tree = gen_random_tree(50, 3)
    res = skeleton_clustering(tree, checkpoint_runs=0)
    assert res.graph.edge_set() == tree.edge_set()
    assert res.meta["batches"] == 0


def test_batch_size_at_least_one():
    g = gen_convex(60, 0.5, 2)
    res = skeleton_clustering(g, batch_fraction=0.001, checkpoint_runs=0)
    assert res.meta["batch_size"] == 1
    assert all(len(list(grp)) == 1 for _, grp in itertools.groupby(res.removals, key=lambda r: r.batch))


def test_bad_arguments():
    g = complete(5)
    with pytest.raises(ValueError):
        skeleton_clustering(g, batch_fraction=0.2)
    with pytest.raises(ValueError):
        skeleton_clustering(g, stop="nope")
    with pytest.raises(ValueError):
        skeleton_clustering(g, stop="target-edges")
    with pytest.raises(DisconnectedGraphError):
        skeleton_clustering(Graph(4, [(0, 1), (2, 3)]))


def _noisy_cliques(seed):
    base = gen_convex(150, 0.3, seed)
    rng = np.random.default_rng(seed)
    extra = [tuple(sorted(map(int, rng.choice(base.n, 2, replace=False)))) for _ in range(25)]
    return base.with_edges(list(map(tuple, base.edges.tolist())) + extra)


@pytest.mark.parametrize("stop", ["delta-c", "xs-peak", "target-edges"])
def test_skeleton_invariants(stop):
    g = _noisy_cliques(1)
    res = skeleton_clustering(g, 0.02, stop, seed=3, target_edges=g.m - 30, checkpoint_runs=4)
    removed = {(r.u, r.v) for r in res.removals[: res.meta["removed"]]}
    assert res.graph.edge_set() | removed == g.edge_set()
    assert not (res.graph.edge_set() & removed)
    assert res.graph.n == g.n and res.graph.labels == g.labels
    fr = [c.frac_removed for c in res.checkpoints]
    assert all(a < b for a, b in zip(fr, fr[1:]))
    assert res.graph.is_connected
    # no triangles gained and the tracked mean clustering equals a fresh computation
    assert np.all(triangles(res.graph) <= triangles(g))
    assert res.checkpoints[res.stop_index].avg_C == pytest.approx(clustering(res.graph).mean(), abs=1e-9)
    if stop == "target-edges":
        assert res.graph.m == g.m - 30


def test_delta_c_stop_rule():
    g = _noisy_cliques(2)
    res = skeleton_clustering(g, 0.01, seed=1, checkpoint_runs=0)
    assert all(r.score > 0 for r in res.removals)
    work = _Working(res.graph)
    best = max((work.delta_c(u, v) for u, v in res.graph.edges.tolist() if not work.is_bridge(u, v)), default=0)
    assert best <= 0


def test_skeleton_recovers_convexity():
    g = _noisy_cliques(4)
    before = measure_convexity(g, runs=30, seed=1).X
    res = skeleton_clustering(g, 0.01, seed=1, checkpoint_runs=0)
    after = measure_convexity(res.graph, runs=30, seed=1).X
    assert after > before
    assert res.kept_fraction > 0.85


def test_xs_peak_picks_checkpoint_maximum():
    g = _noisy_cliques(5)
    res = skeleton_clustering(g, 0.02, "xs-peak", seed=2, checkpoint_runs=5, keep_connected=False)
    xs = [c.Xs for c in res.checkpoints]
    assert res.stop_index == int(np.argmax(xs))


@pytest.mark.parametrize("tie_break", ["lex", "random"])
def test_removal_log_deterministic(tie_break):
    g = _noisy_cliques(6)
    a = skeleton_clustering(g, seed=11, checkpoint_runs=3, tie_break=tie_break)
    b = skeleton_clustering(g, seed=11, checkpoint_runs=3, tie_break=tie_break)
    assert a.removals == b.removals and a.checkpoints == b.checkpoints


def test_lex_ties_follow_edge_order():
    g = _noisy_cliques(7)
    res = skeleton_clustering(g, seed=0, checkpoint_runs=0, tie_break="lex")
    for _, grp in itertools.groupby(res.removals, key=lambda r: (r.batch, r.score)):
        keys = [(r.u, r.v) for r in grp]
        assert keys == sorted(keys)


# c-centrality ordering


def test_ccentrality_path_unchanged():
    p = Graph(20, [(i, i + 1) for i in range(19)])
    res = skeleton_ccentrality(p, runs=4, checkpoint_runs=4, max_fraction=0.2)
    assert res.graph.edge_set() == p.edge_set()
    res = skeleton_ccentrality(p, runs=4, checkpoint_runs=4, keep_connected=True)
    assert res.removals == []


def test_ccentrality_dense_er_orders_by_degree():
    g = gen_er(40, 30, 1)
    res = skeleton_ccentrality(g, runs=10, seed=1, checkpoint_runs=0, max_fraction=0.02)
    cur = set(g.edge_set())
    for r in res.removals:
        deg = Counter(x for e in cur for x in e)
        best = max(deg[u] + deg[v] for u, v in cur)
        assert deg[r.u] + deg[r.v] == best == r.score
        cur.remove((r.u, r.v))


def test_ccentrality_result_is_xs_argmax_prefix():
    g = _noisy_cliques(8)
    res = skeleton_ccentrality(g, runs=5, seed=2, checkpoint_stride=5, checkpoint_runs=5, max_fraction=0.1)
    xs = [c.Xs for c in res.checkpoints]
    assert res.stop_index == int(np.argmax(xs))
    assert res.graph.m == g.m - res.checkpoints[res.stop_index].removed

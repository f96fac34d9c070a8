"""Convex skeleton extraction by targeted edge removal.

Two orderings are provided: by the gain in endpoint clustering when an edge
is dropped (``skeleton_clustering``), and by the endpoints' c-centrality
(``skeleton_ccentrality``). Spanning trees are the degenerate skeleton and
serve as the baseline.
"""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from convskel import seeding
from convskel.convexity import DisconnectedGraphError, c_centrality, ccore_profile, measure_corrected
from convskel.graph import Graph, largest_component, triangles

STOP_POLICIES = ("delta-c", "xs-peak", "target-edges")


def spanning_tree(g: Graph, seed: int = 0) -> Graph:
    """Uniform random spanning tree via loop-erased random walks (Wilson)."""
    if g.n == 0 or not g.is_connected:
        raise DisconnectedGraphError("spanning tree needs a connected graph")
    rng = seeding.rng(seed, seeding.SPANNING_TREE)
    n = g.n
    indptr, indices = g.csr
    in_tree = np.zeros(n, dtype=bool)
    nxt = np.full(n, -1, dtype=np.int64)
    in_tree[int(rng.integers(n))] = True
    edges = []
    for start in rng.permutation(n):
        u = int(start)
        while not in_tree[u]:
            deg = indptr[u + 1] - indptr[u]
            nxt[u] = indices[indptr[u] + int(rng.integers(deg))]
            u = int(nxt[u])
        u = int(start)
        while not in_tree[u]:
            in_tree[u] = True
            edges.append((u, int(nxt[u])))
            u = int(nxt[u])
    return g.with_edges(edges)


class _Working:
    """Mutable adjacency with incrementally tracked triangle counts."""

    def __init__(self, g: Graph):
        self.n = g.n
        self.adj = [set(a) for a in g.adj]
        self.tri = triangles(g).astype(np.int64)
        self.edges = g.edge_set()

    def degree(self, i: int) -> int:
        return len(self.adj[i])

    def remove(self, u: int, v: int) -> None:
        common = self.adj[u] & self.adj[v]
        for w in common:
            self.tri[w] -= 1
        self.tri[u] -= len(common)
        self.tri[v] -= len(common)
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        self.edges.discard((min(u, v), max(u, v)))

    def clustering(self) -> np.ndarray:
        k = np.array([len(a) for a in self.adj], dtype=np.float64)
        denom = k * (k - 1)
        out = np.zeros(self.n)
        np.divide(2.0 * self.tri, denom, out=out, where=denom > 0)
        return out

    def is_bridge(self, u: int, v: int) -> bool:
        if self.adj[u] & self.adj[v]:
            return False
        seen = {u}
        queue = deque([u])
        while queue:
            x = queue.popleft()
            for y in self.adj[x]:
                if x == u and y == v:
                    continue
                if y == v:
                    return False
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return True

    def delta_c(self, u: int, v: int) -> float:
        """``dC_u + dC_v`` if edge ``(u, v)`` were removed."""
        c = len(self.adj[u] & self.adj[v])
        return _dc(len(self.adj[u]), int(self.tri[u]), c) + _dc(len(self.adj[v]), int(self.tri[v]), c)


def _local_c(k: int, t: int) -> float:
    return 2.0 * t / (k * (k - 1)) if k > 1 else 0.0


def _dc(k: int, t: int, lost: int) -> float:
    return _local_c(k - 1, t - lost) - _local_c(k, t)


@dataclass
class Removal:
    step: int
    batch: int
    u: int
    v: int
    score: float


@dataclass
class Checkpoint:
    removed: int
    frac_removed: float
    Xs: float
    X: float
    s: float
    avg_C: float


@dataclass
class SkeletonResult:
    graph: Graph
    removals: list[Removal]
    checkpoints: list[Checkpoint]
    stop_index: int
    stop_reason: str
    meta: dict = field(default_factory=dict)

    @property
    def kept_fraction(self) -> float:
        m0 = self.meta.get("m_input") or 1
        return self.graph.m / m0

    def removal_rows(self, g: Graph) -> list[tuple]:
        lab = g.labels
        return [(r.step, r.batch, lab[r.u], lab[r.v], r.score) for r in self.removals]

    def checkpoint_rows(self) -> list[tuple]:
        return [(c.frac_removed, c.Xs, c.X, c.s, c.avg_C) for c in self.checkpoints]


def _priority(g: Graph, tie_break: str, rng: np.random.Generator) -> dict[tuple[int, int], float]:
    """Secondary sort key among equal scores; lower sorts first."""
    edges = [(int(u), int(v)) for u, v in g.edges]
    if tie_break == "lex":
        return {e: i for i, e in enumerate(edges)}
    if tie_break == "random":
        perm = rng.permutation(len(edges))
        return {e: int(perm[i]) for i, e in enumerate(edges)}
    raise ValueError(f"unknown tie_break {tie_break!r}")


def _checkpoint(g0: Graph, work: _Working, removed: int, runs: int, seed: int, idx: int) -> Checkpoint:
    avg_c = float(work.clustering().mean())
    frac = removed / g0.m if g0.m else 0.0
    if runs <= 0:
        return Checkpoint(removed, frac, math.nan, math.nan, math.nan, avg_c)
    cur = g0.with_edges(sorted(work.edges))
    with warnings.catch_warnings():
        # trajectories deliberately pass through fragmented graphs
        warnings.simplefilter("ignore", UserWarning)
        rep = measure_corrected(cur, runs, seeding.child_seed(seed, seeding.CHECKPOINT, idx))
    return Checkpoint(removed, frac, rep.Xs, rep.X, rep.s, avg_c)


def _finish(g: Graph, removals, checkpoints, stop_index, reason, meta) -> SkeletonResult:
    k = checkpoints[stop_index].removed
    gone = {(r.u, r.v) for r in removals[:k]}
    keep = np.array([(int(u), int(v)) not in gone for u, v in g.edges], dtype=bool)
    meta = dict(meta, m_input=g.m, removed=k)
    return SkeletonResult(g.edge_subgraph(keep), removals, checkpoints, stop_index, reason, meta)


def _argmax_xs(checkpoints: list[Checkpoint]) -> int:
    xs = np.array([c.Xs for c in checkpoints])
    if np.all(np.isnan(xs)):
        return len(checkpoints) - 1
    return int(np.nanargmax(xs))


def skeleton_clustering(
    g: Graph,
    batch_fraction: float = 0.01,
    stop: str = "delta-c",
    seed: int = 0,
    target_edges: int | None = None,
    checkpoint_runs: int = 10,
    keep_connected: bool = True,
    tie_break: str = "lex",
) -> SkeletonResult:
    """Remove edges in decreasing ``dC_i + dC_j`` order, in batches.

    Scores are computed once per batch on the batch-start graph. Within a
    batch edges go one at a time and, with ``keep_connected``, an edge that is
    a bridge at that moment is skipped.

    Stop policies:

    ``delta-c``
        stop when no removable edge has a positive score;
    ``xs-peak``
        remove until nothing is removable, return the prefix with the highest
        checkpointed ``Xs`` (informative with ``keep_connected=False``; with
        it the graph tends to a spanning tree where ``Xs = 1``);
    ``target-edges``
        stop once ``target_edges`` edges remain.
    """
    if stop not in STOP_POLICIES:
        raise ValueError(f"unknown stop policy {stop!r}")
    if not 0 < batch_fraction <= 0.05:
        raise ValueError("batch_fraction must be in (0, 0.05]")
    if stop == "target-edges":
        if target_edges is None or not 0 <= target_edges <= g.m:
            raise ValueError("target-edges policy needs 0 <= target_edges <= m")
    if not g.is_connected:
        raise DisconnectedGraphError("skeleton extraction needs a connected graph")

    rng = seeding.rng(seed, seeding.SKELETON)
    prio = _priority(g, tie_break, rng)
    work = _Working(g)
    batch_size = max(1, int(round(batch_fraction * g.m)))
    removals: list[Removal] = []
    checkpoints = [_checkpoint(g, work, 0, checkpoint_runs, seed, 0)]
    reason = "no removable edges"
    batch = 0
    while True:
        if stop == "target-edges" and len(work.edges) <= target_edges:
            reason = "target edge count reached"
            break
        scored = sorted(((-work.delta_c(u, v), prio[(u, v)], u, v) for u, v in work.edges))
        quota = batch_size
        if stop == "target-edges":
            quota = min(quota, len(work.edges) - target_edges)
        done = 0
        for neg, _, u, v in scored:
            if done == quota:
                break
            if stop == "delta-c" and -neg <= 0:
                break
            if keep_connected and work.is_bridge(u, v):
                continue
            work.remove(u, v)
            removals.append(Removal(len(removals) + 1, batch, u, v, -neg))
            done += 1
        if done == 0:
            if stop == "delta-c":
                reason = "max dC <= 0 over removable edges"
            break
        batch += 1
        checkpoints.append(_checkpoint(g, work, len(removals), checkpoint_runs, seed, batch))

    stop_index = _argmax_xs(checkpoints) if stop == "xs-peak" else len(checkpoints) - 1
    meta = dict(method="clustering", stop=stop, batch_fraction=batch_fraction, batch_size=batch_size,
                checkpoint_runs=checkpoint_runs, keep_connected=keep_connected,
                tie_break=tie_break, seed=seed, batches=batch)
    return _finish(g, removals, checkpoints, stop_index, reason, meta)


def _profile_scores(g0: Graph, work: _Working, runs: int, t_threshold: int, seed: int) -> np.ndarray:
    cur = g0.with_edges(sorted(work.edges))
    lcc, _ = largest_component(cur)
    p = np.zeros(cur.n)
    if lcc.n >= 2:
        t = min(t_threshold, lcc.n - 1)
        prof = ccore_profile(lcc, runs, t, seed)
        members = np.flatnonzero(cur.component_labels == np.argmax(np.bincount(cur.component_labels)))
        p[members] = prof.p
    return c_centrality(cur, p)


def skeleton_ccentrality(
    g: Graph,
    runs: int = 10,
    seed: int = 0,
    t_threshold: int = 15,
    refresh: int = 1,
    checkpoint_stride: int | None = None,
    checkpoint_runs: int = 10,
    max_fraction: float = 0.6,
    keep_connected: bool = False,
    tie_break: str = "lex",
) -> SkeletonResult:
    """Remove edges one at a time in decreasing ``c_i + c_j``.

    The c-profile is re-estimated every ``refresh`` removals with ``runs``
    expansion runs on the current largest component (nodes outside it count
    as periphery, ``p = 0``). ``Xs`` is checkpointed every
    ``checkpoint_stride`` removals; the result is the prefix at the ``Xs``
    peak. The graph is allowed to fall apart unless ``keep_connected``.
    """
    if refresh < 1:
        raise ValueError("refresh must be >= 1")
    if not g.is_connected:
        raise DisconnectedGraphError("skeleton extraction needs a connected graph")
    if checkpoint_stride is None:
        checkpoint_stride = max(1, g.m // 100)
    rng = seeding.rng(seed, seeding.SKELETON)
    prio = _priority(g, tie_break, rng)
    work = _Working(g)
    limit = int(math.floor(max_fraction * g.m))
    removals: list[Removal] = []
    checkpoints = [_checkpoint(g, work, 0, checkpoint_runs, seed, 0)]
    c = None
    reason = "removal limit reached"
    while len(removals) < limit:
        step = len(removals)
        if c is None or step % refresh == 0:
            c = _profile_scores(g, work, runs, t_threshold, seeding.child_seed(seed, seeding.PROFILE, step))
        best = None
        for u, v in sorted(work.edges, key=lambda e: (-(c[e[0]] + c[e[1]]), prio[e])):
            if keep_connected and work.is_bridge(u, v):
                continue
            best = (u, v)
            break
        if best is None:
            reason = "no removable edges"
            break
        u, v = best
        work.remove(u, v)
        removals.append(Removal(step + 1, step, u, v, float(c[u] + c[v])))
        if len(removals) % checkpoint_stride == 0:
            checkpoints.append(_checkpoint(g, work, len(removals), checkpoint_runs, seed, len(checkpoints)))
    if checkpoints[-1].removed != len(removals):
        checkpoints.append(_checkpoint(g, work, len(removals), checkpoint_runs, seed, len(checkpoints)))
    stop_index = _argmax_xs(checkpoints)
    meta = dict(method="ccentrality", runs=runs, t_threshold=t_threshold, refresh=refresh,
                checkpoint_stride=checkpoint_stride, checkpoint_runs=checkpoint_runs,
                max_fraction=max_fraction, keep_connected=keep_connected,
                tie_break=tie_break, seed=seed)
    return _finish(g, removals, checkpoints, stop_index, "xs peak; " + reason, meta)

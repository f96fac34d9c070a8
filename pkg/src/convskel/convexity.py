"""Convex hulls, the convex expansion procedure and convexity measures.

A connected node set is convex when it contains every geodesic between its
members. The expansion procedure grows a convex set from a random node, each
step following a random edge out of the set and re-closing to the hull. In a
tree of cliques the set grows by exactly one node per step; in non-convex
graphs it swallows the graph after a few steps. Convexity ``X`` scores the
excess growth, ``Xs`` corrects it for disconnected graphs.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from convskel import _kernels, seeding
from convskel.graph import Graph, largest_component

Z99 = 2.5758293035489004  # two-sided 99% normal quantile

DEFAULT_RUNS = 100
DEFAULT_T_THRESHOLD = 15


class DisconnectedGraphError(ValueError):
    pass


def _induces_connected(g: Graph, nodes: frozenset[int]) -> bool:
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    adj = g.adj
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w in nodes and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


def convex_hull(g: Graph, nodes: Iterable[int]) -> frozenset[int]:
    """Smallest convex node set containing ``nodes``.

    The seeds need not induce a connected subgraph (the closure connects
    them), but they must share a component of ``g``: there are no geodesics
    between components. ``DisconnectedGraphError`` is raised otherwise.
    """
    nodes = frozenset(int(x) for x in nodes)
    if not nodes:
        raise ValueError("hull of an empty set")
    if any(not 0 <= x < g.n for x in nodes):
        raise IndexError("node not in graph")
    comp = g.component_labels
    if len({int(comp[x]) for x in nodes}) > 1:
        raise DisconnectedGraphError("seed nodes lie in different components")
    indptr, indices = g.csr
    mask = _kernels.hull(g.n, indptr, indices, np.array(sorted(nodes), dtype=np.int64))
    return frozenset(np.flatnonzero(mask).tolist())


def is_convex(g: Graph, nodes: Iterable[int]) -> bool:
    nodes = frozenset(nodes)
    return bool(nodes) and _induces_connected(g, nodes) and convex_hull(g, nodes) == nodes


@dataclass
class ExpansionTrace:
    """Record of a single expansion run.

    ``join_step[i]`` is the step at which node ``i`` entered the convex set
    (-1 if never, for truncated runs); ``sizes[t]`` is the set size after
    step ``t``.
    """

    seed: int
    run: int
    start: int
    join_step: np.ndarray
    sizes: np.ndarray

    @property
    def n(self) -> int:
        return len(self.join_step)

    @property
    def fractions(self) -> np.ndarray:
        return self.sizes / self.n

    @property
    def cover_step(self) -> int | None:
        hit = np.flatnonzero(self.sizes == self.n)
        return int(hit[0]) if len(hit) else None

    def members(self, t: int) -> frozenset[int]:
        return frozenset(np.flatnonzero((self.join_step >= 0) & (self.join_step <= t)).tolist())

    @property
    def convexity(self) -> float:
        """Per-run convexity; equals ``(t' + 1) / n`` for a complete trace."""
        return 1.0 - _excess(self.sizes[None, :], 1) / self.n


def _excess(size_rows: np.ndarray, runs: int) -> int:
    """Sum over steps of ``max(total growth - runs, 0)``, in exact integers."""
    total = size_rows.sum(axis=0)
    growth = np.diff(total)
    return int(np.maximum(growth - runs, 0).sum())


def expansion_run(g: Graph, seed: int, run: int = 0, max_steps: int | None = None) -> ExpansionTrace:
    """One convex expansion run on a connected graph.

    The start node is uniform; each later node ``i`` outside the set is picked
    with probability proportional to its number of neighbours inside the set.
    """
    n = g.n
    if n == 0:
        raise ValueError("empty graph")
    rng = seeding.rng(seed, seeding.EXPANSION, run)
    start = int(rng.integers(n))
    uniforms = rng.random(n)
    steps = n - 1 if max_steps is None else min(int(max_steps), n - 1)
    indptr, indices = g.csr
    join, ok = _kernels.expansion(n, indptr, indices, start, uniforms, steps)
    if not ok:
        raise DisconnectedGraphError(
            "graph is disconnected; use measure_corrected for corrected convexity"
        )
    joined = join[join >= 0]
    sizes = np.cumsum(np.bincount(joined, minlength=steps + 1))[: steps + 1]
    if max_steps is None:
        sizes = np.pad(sizes, (0, n - len(sizes)), constant_values=n)
    return ExpansionTrace(seed, run, start, join, sizes)


def _runs(g: Graph, runs: int, seed: int, max_steps: int | None, jobs: int) -> list[ExpansionTrace]:
    work = lambda r: expansion_run(g, seed, r, max_steps)  # noqa: E731
    if jobs > 1 and runs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(work, range(runs)))
    return [work(r) for r in range(runs)]


@dataclass
class ConvexityReport:
    n: int
    m: int
    runs: int
    X: float
    Xs: float
    s: float
    pendant_bound: float
    ci99: float | None
    X_run_mean: float
    X_cover: float
    mean_trace: np.ndarray
    run_X: np.ndarray = field(repr=False)
    traces: list[ExpansionTrace] | None = field(default=None, repr=False)

    @property
    def ci99_Xs(self) -> float | None:
        return None if self.ci99 is None else self.s * self.ci99

    def to_dict(self, trace: bool = False) -> dict:
        out = {
            "n": self.n,
            "m": self.m,
            "runs": self.runs,
            "X": self.X,
            "Xs": self.Xs,
            "s": self.s,
            "pendant_bound": self.pendant_bound,
            "ci99": self.ci99,
            "X_run_mean": self.X_run_mean,
            "X_cover": self.X_cover,
            "averaging": "mean-delta-s",
        }
        if trace:
            out["trace"] = [float(x) for x in self.mean_trace]
        return out


def pendant_bound(g: Graph) -> float:
    """Fraction of degree-one nodes, a lower bound on convexity."""
    if g.n == 0:
        return 0.0
    return float(np.sum(g.degrees == 1)) / g.n


def measure_convexity(
    g: Graph,
    runs: int = DEFAULT_RUNS,
    seed: int = 0,
    keep_traces: bool = False,
    jobs: int = 1,
) -> ConvexityReport:
    """Convexity ``X`` of a connected graph from ``runs`` expansion runs.

    ``X`` applies the excess-growth formula to the run-averaged ``s(t)``; the
    mean of per-run values and the cover-step form ``(<t'> + 1) / n`` are
    reported alongside.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if g.n == 0:
        raise ValueError("empty graph")
    if not g.is_connected:
        raise DisconnectedGraphError(
            "graph is disconnected; use measure_corrected for corrected convexity"
        )
    traces = _runs(g, runs, seed, None, jobs)
    n = g.n
    rows = np.stack([t.sizes for t in traces])
    X = 1.0 - _excess(rows, runs) / (runs * n)
    run_X = np.array([t.convexity for t in traces])
    covers = np.array([t.cover_step for t in traces], dtype=np.float64)
    ci = Z99 * float(run_X.std(ddof=1)) / math.sqrt(runs) if runs > 1 else None
    return ConvexityReport(
        n=n,
        m=g.m,
        runs=runs,
        X=X,
        Xs=X,
        s=1.0,
        pendant_bound=pendant_bound(g),
        ci99=ci,
        X_run_mean=float(run_X.mean()),
        X_cover=float((covers.mean() + 1) / n),
        mean_trace=rows.mean(axis=0) / n,
        run_X=run_X,
        traces=traces if keep_traces else None,
    )


def measure_corrected(
    g: Graph,
    runs: int = DEFAULT_RUNS,
    seed: int = 0,
    keep_traces: bool = False,
    jobs: int = 1,
) -> ConvexityReport:
    """Corrected convexity ``Xs = s * X(LCC)`` for possibly disconnected graphs."""
    if g.n == 0:
        raise ValueError("empty graph")
    lcc, s = largest_component(g)
    if s < 0.5:
        warnings.warn(
            f"largest component holds only {s:.2f} of the nodes; corrected convexity is not meaningful",
            stacklevel=2,
        )
    rep = measure_convexity(lcc, runs, seed, keep_traces, jobs)
    rep.n, rep.m = g.n, g.m
    rep.s = s
    rep.Xs = s * rep.X
    return rep


@dataclass
class CCoreProfile:
    """Per-node inclusion probabilities ``p`` and c-centralities ``c``."""

    p: np.ndarray
    c: np.ndarray
    core: np.ndarray
    t_threshold: int
    runs: int
    majority: float = 0.5

    def rows(self, g: Graph) -> list[tuple[str, float, float, bool]]:
        return [(g.labels[i], float(self.p[i]), float(self.c[i]), bool(self.core[i])) for i in range(g.n)]


def c_centrality(g: Graph, p: np.ndarray) -> np.ndarray:
    """``c_i = -k_i + 2 * sum of p_j over neighbours j``."""
    return -g.degrees.astype(np.float64) + 2.0 * (g.adjacency_matrix @ np.asarray(p, dtype=np.float64))


def ccore_profile(
    g: Graph,
    runs: int = DEFAULT_RUNS,
    t_threshold: int = DEFAULT_T_THRESHOLD,
    seed: int = 0,
    majority: float = 0.5,
    jobs: int = 1,
) -> CCoreProfile:
    """Estimate c-core membership after ``t_threshold`` expansion steps.

    ``p_i`` is the fraction of runs whose convex set contains ``i`` after
    ``t_threshold`` steps; the c-core is ``{i : p_i > majority}``.
    """
    if t_threshold < 1:
        raise ValueError("t_threshold must be >= 1")
    if t_threshold >= g.n:
        raise ValueError(f"t_threshold={t_threshold} needs more than {g.n} nodes")
    if not g.is_connected:
        raise DisconnectedGraphError("c-core profile needs a connected graph")
    traces = _runs(g, runs, seed, t_threshold, jobs)
    hits = np.zeros(g.n, dtype=np.int64)
    for tr in traces:
        hits += (tr.join_step >= 0) & (tr.join_step <= t_threshold)
    p = hits / runs
    return CCoreProfile(p, c_centrality(g, p), p > majority, t_threshold, runs, majority)

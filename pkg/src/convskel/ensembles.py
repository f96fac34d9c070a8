"""Null models and synthetic graph generators.

All functions are pure in ``(inputs, seed)``; randomness comes from
``convskel.seeding`` so the same seed always gives the same graph.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from convskel import seeding
from convskel.graph import Graph


class Rewired(NamedTuple):
    graph: Graph
    swaps: int
    requested: int
    attempts: int

    @property
    def complete(self) -> bool:
        return self.swaps == self.requested


def _edge_state(g: Graph):
    edges = [(int(u), int(v)) for u, v in g.edges]
    return edges, set(edges)


def _key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


def rewire_degree_preserving(g: Graph, fraction: float, seed: int = 0, max_attempts: int | None = None) -> Rewired:
    """Swap one endpoint between random edge pairs, ``floor(fraction * m)`` times.

    ``(a, b), (c, d) -> (a, d), (c, b)``; swaps that would create a self-edge
    or a parallel edge are rejected and retried, up to ``100 * m`` attempts.
    """
    if fraction < 0:
        raise ValueError("fraction must be >= 0")
    m = g.m
    requested = int(math.floor(fraction * m))
    cap = 100 * m if max_attempts is None else max_attempts
    edges, present = _edge_state(g)
    rng = seeding.rng(seed, seeding.REWIRE, 1)
    swaps = attempts = 0
    while swaps < requested and attempts < cap and m >= 2:
        attempts += 1
        i, j = rng.integers(m, size=2)
        if i == j:
            continue
        a, b = edges[i]
        c, d = edges[j]
        if rng.random() < 0.5:
            c, d = d, c
        if a == d or c == b:
            continue
        e1, e2 = _key(a, d), _key(c, b)
        if e1 == e2 or e1 in present or e2 in present:
            continue
        present.discard(edges[i])
        present.discard(edges[j])
        present.add(e1)
        present.add(e2)
        edges[i], edges[j] = e1, e2
        swaps += 1
    return Rewired(g.with_edges(edges), swaps, requested, attempts)


def rewire_full(g: Graph, fraction: float, seed: int = 0, max_attempts: int | None = None) -> Rewired:
    """Move one endpoint of random edges to uniformly random other nodes.

    Keeps ``m`` and simplicity; the degree sequence is not preserved.
    """
    if fraction < 0:
        raise ValueError("fraction must be >= 0")
    m, n = g.m, g.n
    requested = int(math.floor(fraction * m))
    cap = 100 * m if max_attempts is None else max_attempts
    edges, present = _edge_state(g)
    rng = seeding.rng(seed, seeding.REWIRE, 2)
    swaps = attempts = 0
    while swaps < requested and attempts < cap and n >= 3:
        attempts += 1
        i = int(rng.integers(m))
        a, b = edges[i]
        if rng.random() < 0.5:
            a, b = b, a
        c = int(rng.integers(n))
        if c == a or c == b:
            continue
        e = _key(a, c)
        if e in present:
            continue
        present.discard(edges[i])
        present.add(e)
        edges[i] = e
        swaps += 1
    return Rewired(g.with_edges(edges), swaps, requested, attempts)


@dataclass
class GeneratorConfig:
    kind: str
    seed: int
    n: int | None = None
    avg_k: float | None = None
    side: int | None = None
    t: float | None = None
    core_fraction: float | None = None
    density_core: float | None = None
    density_cross: float | None = None
    density_periphery: float = 0.0
    tree_model: str | None = None
    reattach: str | None = None

    def header(self) -> list[str]:
        return [f"{k}={v}" for k, v in asdict(self).items() if v is not None]


def generate(cfg: GeneratorConfig) -> Graph:
    if cfg.kind == "er":
        return gen_er(cfg.n, cfg.avg_k, cfg.seed)
    if cfg.kind in ("lattice-rect", "lattice-tri"):
        return gen_lattice(cfg.kind.split("-")[1], cfg.side, cfg.seed)
    if cfg.kind == "random-tree":
        return gen_random_tree(cfg.n, cfg.seed, cfg.tree_model or "attach")
    if cfg.kind == "convex":
        return gen_convex(cfg.n, cfg.t, cfg.seed)
    if cfg.kind == "core-periphery":
        return gen_core_periphery(cfg.n, cfg.core_fraction, cfg.density_core, cfg.density_cross,
                                  cfg.seed, cfg.density_periphery, cfg.reattach or "all")
    raise ValueError(f"unknown generator kind {cfg.kind!r}")


def gen_er(n: int, avg_k: float, seed: int = 0) -> Graph:
    """Random graph with exactly ``round(n * avg_k / 2)`` distinct uniform edges."""
    if n < 2 or not 0 < avg_k <= n - 1:
        raise ValueError(f"infeasible average degree {avg_k} for n={n}")
    m = int(round(n * avg_k / 2))
    rng = seeding.rng(seed, seeding.GENERATOR, 1)
    chosen: set[tuple[int, int]] = set()
    edges = []
    while len(edges) < m:
        u, v = (int(x) for x in rng.integers(n, size=2))
        if u == v:
            continue
        e = _key(u, v)
        if e not in chosen:
            chosen.add(e)
            edges.append(e)
    return Graph(n, edges)


def gen_lattice(kind: str, side: int, seed: int = 0) -> Graph:
    """``side x side`` open lattice; ``tri`` adds one diagonal per unit square.

    Deterministic; ``seed`` is accepted for a uniform generator signature.
    """
    if side < 2:
        raise ValueError("side must be >= 2")
    if kind not in ("rect", "tri"):
        raise ValueError(f"unknown lattice kind {kind!r}")
    node = lambda r, c: r * side + c  # noqa: E731
    edges = []
    for r in range(side):
        for c in range(side):
            if c + 1 < side:
                edges.append((node(r, c), node(r, c + 1)))
            if r + 1 < side:
                edges.append((node(r, c), node(r + 1, c)))
            if kind == "tri" and r + 1 < side and c + 1 < side:
                edges.append((node(r, c), node(r + 1, c + 1)))
    return Graph(side * side, edges)


def _tree_edges(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    return [(int(rng.integers(v)), v) for v in range(1, n)]


def _prufer_edges(n: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    if n <= 2:
        return [(0, 1)] if n == 2 else []
    seq = rng.integers(n, size=n - 2).tolist()
    remaining = np.bincount(seq, minlength=n) + 1
    leaves = [v for v in range(n) if remaining[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for v in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, v))
        remaining[v] -= 1
        if remaining[v] == 1:
            heapq.heappush(leaves, v)
    edges.append((heapq.heappop(leaves), heapq.heappop(leaves)))
    return edges


def gen_random_tree(n: int, seed: int = 0, model: str = "attach") -> Graph:
    """Random tree on ``n`` nodes.

    ``model="attach"`` grows a recursive tree, node ``v`` joining a uniform
    earlier node (mean distance grows like ``log n``); ``model="uniform"``
    draws uniformly among all labelled trees from a random Pruefer sequence
    (mean distance grows like ``sqrt(n)``).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if model == "attach":
        rng = seeding.rng(seed, seeding.GENERATOR, 2)
        return Graph(n, _tree_edges(n, rng))
    if model == "uniform":
        rng = seeding.rng(seed, seeding.GENERATOR, 5)
        return Graph(n, _prufer_edges(n, rng))
    raise ValueError(f"unknown tree model {model!r}")


def clique_size_bound(n_target: int, t: float) -> int:
    tree_n = int(math.ceil(t * n_target))
    if tree_n <= 1:
        raise ValueError("tree fraction too small")
    return int(math.floor(2 * (n_target - 1) / (tree_n - 1)))


def gen_convex(n_target: int, t: float, seed: int = 0) -> Graph:
    """Tree of cliques: a random tree on ``ceil(t * n)`` nodes, each edge blown up to a clique.

    Clique sizes are uniform integers on ``[2, floor(2(n-1)/(tn-1))]``; every
    clique adds ``k - 2`` fresh nodes to the edge's endpoints.
    """
    if not (2 / n_target <= t <= 1):
        raise ValueError(f"t must lie in [2/n, 1], got {t}")
    rng = seeding.rng(seed, seeding.GENERATOR, 3)
    tree_n = int(math.ceil(t * n_target))
    kmax = clique_size_bound(n_target, t)
    if kmax < 2:
        raise ValueError("clique size interval is empty")
    edges = []
    nxt = tree_n
    for u, v in _tree_edges(tree_n, rng):
        k = int(rng.integers(2, kmax + 1))
        members = [u, v] + list(range(nxt, nxt + k - 2))
        nxt += k - 2
        edges.extend((a, b) for i, a in enumerate(members) for b in members[i + 1 :])
    return Graph(nxt, edges)


def gen_core_periphery(
    n: int,
    core_fraction: float,
    density_core: float,
    density_cross: float,
    seed: int = 0,
    density_periphery: float = 0.0,
    reattach: str = "all",
) -> Graph:
    """Two-block random graph; isolated nodes get one uniform random edge.

    The first ``ceil(c * n)`` nodes form the core (``g.groups`` is 1 for core,
    0 for periphery). Reattachment targets are drawn from all other nodes
    (``reattach="all"``) or only from nodes that already had an edge
    (``"connected"``), which keeps reattached nodes pendant.
    """
    if reattach not in ("all", "connected"):
        raise ValueError(f"unknown reattach mode {reattach!r}")
    if not 0 < core_fraction < 1:
        raise ValueError("core fraction must be in (0, 1)")
    for d in (density_core, density_cross, density_periphery):
        if not 0 <= d <= 1:
            raise ValueError("densities must be in [0, 1]")
    rng = seeding.rng(seed, seeding.GENERATOR, 4)
    nc = int(math.ceil(core_fraction * n))
    core = np.arange(n) < nc
    edges = []
    for u in range(n - 1):
        vs = np.arange(u + 1, n)
        if core[u]:
            p = np.where(core[vs], density_core, density_cross)
        else:
            p = np.where(core[vs], density_cross, density_periphery)
        hit = rng.random(len(vs)) < p
        edges.extend((u, int(v)) for v in vs[hit])
    deg = np.zeros(n, dtype=np.int64)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    targets = np.flatnonzero(deg > 0)
    if reattach == "all" or len(targets) == 0:
        targets = np.arange(n)
    for u in range(n):
        if deg[u] == 0 and n > 1:
            pool = targets[targets != u]
            v = int(pool[rng.integers(len(pool))])
            edges.append(_key(u, v))
            deg[u] += 1
            deg[v] += 1
    return Graph(n, edges, groups=core.astype(np.int64))


def block_densities(g: Graph, core: np.ndarray) -> dict[str, float]:
    """Within-core, core-periphery and within-periphery edge densities."""
    core = np.asarray(core, dtype=bool)
    nc = int(core.sum())
    npp = g.n - nc
    e = g.edges
    cu, cv = core[e[:, 0]], core[e[:, 1]]
    within = int(np.sum(cu & cv))
    cross = int(np.sum(cu ^ cv))
    peri = int(np.sum(~cu & ~cv))
    pairs_c = nc * (nc - 1) / 2
    pairs_x = nc * npp
    pairs_p = npp * (npp - 1) / 2
    return {
        "core_fraction": nc / g.n if g.n else 0.0,
        "density_core": within / pairs_c if pairs_c else 0.0,
        "density_cross": cross / pairs_x if pairs_x else 0.0,
        "density_periphery": peri / pairs_p if pairs_p else 0.0,
    }

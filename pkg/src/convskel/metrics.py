"""Comparing graphs, partitions and node positions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path

from convskel.backbones import _bfs_dag
from convskel.convexity import ccore_profile
from convskel.graph import Graph, clustering


class NodeSetMismatch(ValueError):
    pass


def _label_edges(g: Graph) -> set[frozenset[str]]:
    lab = g.labels
    return {frozenset((lab[u], lab[v])) for u, v in g.edges}


def ged(g1: Graph, g2: Graph) -> int:
    """Edges to insert or delete to turn ``g1`` into ``g2`` (label-aligned)."""
    if g1.n != g2.n or set(g1.labels) != set(g2.labels):
        raise NodeSetMismatch("graphs have different node sets")
    return len(_label_edges(g1) ^ _label_edges(g2))


def ged_fraction(g1: Graph, g2: Graph) -> float:
    m = max(g1.m, g2.m)
    return ged(g1, g2) / m if m else 0.0


def ged_matrix(graphs: Sequence[Graph]) -> np.ndarray:
    if not graphs:
        return np.zeros((0, 0), dtype=np.int64)
    labels = set(graphs[0].labels)
    for g in graphs[1:]:
        if g.n != graphs[0].n or set(g.labels) != labels:
            raise NodeSetMismatch("graphs have different node sets")
    sets = [_label_edges(g) for g in graphs]
    k = len(graphs)
    out = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = len(sets[i] ^ sets[j])
    return out


class Partition:
    """Community id per node, relabelled to contiguous ids in order of first appearance."""

    def __init__(self, membership: Sequence[int] | np.ndarray):
        raw = np.asarray(membership)
        _, first, inv = np.unique(raw, return_index=True, return_inverse=True)
        # renumber by first appearance so ids do not depend on the raw values
        rank = np.empty(len(first), dtype=np.int64)
        rank[np.argsort(first)] = np.arange(len(first))
        self.membership = rank[inv.ravel()]

    def __repr__(self) -> str:
        return f"Partition(n={self.n}, communities={self.count})"

    @property
    def n(self) -> int:
        return len(self.membership)

    @property
    def count(self) -> int:
        return int(self.membership.max()) + 1 if self.n else 0


def read_partition(path: str | Path, g: Graph) -> Partition:
    """Read ``node_label community_id`` lines aligned to ``g``'s labels."""
    index = {lab: i for i, lab in enumerate(g.labels)}
    comm: list[str | None] = [None] * g.n
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'node community'")
        if parts[0] not in index:
            raise NodeSetMismatch(f"line {lineno}: unknown node {parts[0]!r}")
        comm[index[parts[0]]] = parts[1]
    missing = [g.labels[i] for i, c in enumerate(comm) if c is None]
    if missing:
        raise NodeSetMismatch(f"{len(missing)} nodes without a community, e.g. {missing[0]!r}")
    return Partition(comm)


def _contingency(p1: Partition, p2: Partition) -> np.ndarray:
    if p1.n != p2.n:
        raise NodeSetMismatch("partitions cover different node sets")
    table = np.zeros((p1.count, p2.count))
    np.add.at(table, (p1.membership, p2.membership), 1)
    return table


def _entropies(p1: Partition, p2: Partition) -> tuple[float, float, float]:
    """``H1``, ``H2`` and mutual information ``I``, natural logarithms."""
    t = _contingency(p1, p2) / p1.n
    a, b = t.sum(axis=1), t.sum(axis=0)
    h1 = -float(np.sum(a * np.log(a)))
    h2 = -float(np.sum(b * np.log(b)))
    nz = t > 0
    mi = float(np.sum(t[nz] * np.log(t[nz] / np.outer(a, b)[nz])))
    return h1, h2, max(mi, 0.0)


def nmi(p1: Partition, p2: Partition, norm: str = "arithmetic") -> float:
    """Normalised mutual information.

    ``norm="arithmetic"`` divides by the mean entropy, ``"max"`` by the larger
    one. Two zero-entropy partitions score 1 (they are necessarily identical).
    """
    h1, h2, mi = _entropies(p1, p2)
    if norm == "arithmetic":
        denom = (h1 + h2) / 2
    elif norm == "max":
        denom = max(h1, h2)
    else:
        raise ValueError(f"unknown normalisation {norm!r}")
    if denom <= 0:
        return 1.0
    return min(1.0, mi / denom)


def nvi(p1: Partition, p2: Partition) -> float:
    """Variation of information divided by ``log n``."""
    if p1.n <= 1:
        return 0.0
    h1, h2, mi = _entropies(p1, p2)
    return max(0.0, h1 + h2 - 2 * mi) / math.log(p1.n)


def _check_partition(g: Graph, p: Partition) -> None:
    if p.n != g.n:
        raise NodeSetMismatch("partition and graph differ in node count")
    if g.m == 0:
        raise ValueError("graph has no edges")


def modularity(g: Graph, p: Partition) -> float:
    """``Q = sum_c e_c/m - (d_c/2m)^2`` on the unweighted graph."""
    _check_partition(g, p)
    c = p.membership
    e = g.edges
    intra = np.bincount(c[e[:, 0]][c[e[:, 0]] == c[e[:, 1]]], minlength=p.count)
    dsum = np.bincount(c, weights=g.degrees, minlength=p.count)
    m = g.m
    return float(np.sum(intra / m - (dsum / (2 * m)) ** 2))


def inter_group_fraction(g: Graph, p: Partition) -> float:
    _check_partition(g, p)
    c = p.membership
    return float(np.mean(c[g.edges[:, 0]] != c[g.edges[:, 1]]))


def pagerank(g: Graph, damping: float = 0.85, tol: float = 1e-12, max_iter: int = 10_000) -> np.ndarray:
    """Random-walk visit probabilities with uniform teleports (L1 convergence)."""
    n = g.n
    deg = g.degrees.astype(np.float64)
    a = g.adjacency_matrix
    x = np.full(n, 1.0 / n)
    dangling = deg == 0
    inv = np.zeros(n)
    inv[~dangling] = 1.0 / deg[~dangling]
    for _ in range(max_iter):
        spread = a @ (x * inv)
        new = damping * (spread + x[dangling].sum() / n) + (1 - damping) / n
        new /= new.sum()
        if np.abs(new - x).sum() < tol:
            return new
        x = new
    return x


def closeness(g: Graph) -> np.ndarray:
    """Average reciprocal distance to the other nodes."""
    n = g.n
    if n < 2:
        return np.zeros(n)
    d = shortest_path(g.adjacency_matrix, unweighted=True, directed=False)
    with np.errstate(divide="ignore"):
        r = np.where(np.isfinite(d) & (d > 0), 1.0 / d, 0.0)
    return r.sum(axis=1) / (n - 1)


def node_betweenness(g: Graph, normalised: bool = True) -> np.ndarray:
    """Geodesic fraction through each node, over pairs not including it."""
    n = g.n
    adj = [sorted(a) for a in g.adj]
    bc = np.zeros(n)
    for s in range(n):
        order, _, sigma, preds = _bfs_dag(adj, s, n)
        delta = [0.0] * n
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                bc[w] += delta[w]
    bc /= 2.0
    if normalised:
        pairs = (n - 1) * (n - 2) / 2
        bc = bc / pairs if pairs else bc
    return bc


@dataclass
class PositionVectors:
    k: np.ndarray
    PR: np.ndarray
    CC: np.ndarray
    BC: np.ndarray
    C: np.ndarray
    c: np.ndarray | None

    NAMES = ("k", "PR", "CC", "BC", "C", "c")

    def items(self) -> list[tuple[str, np.ndarray]]:
        return [(name, getattr(self, name)) for name in self.NAMES if getattr(self, name) is not None]


def position_vectors(g: Graph, runs: int = 100, seed: int = 0, damping: float = 0.85,
                     t_threshold: int = 15, with_ccentrality: bool = True) -> PositionVectors:
    c = None
    if with_ccentrality and g.is_connected and g.n > t_threshold:
        c = ccore_profile(g, runs, t_threshold, seed).c
    return PositionVectors(
        k=g.degrees.astype(np.float64),
        PR=pagerank(g, damping),
        CC=closeness(g),
        BC=node_betweenness(g),
        C=clustering(g),
        c=c,
    )


def pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Pearson r, or ``None`` when either vector is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("need two equal-length vectors of length >= 2")
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = math.sqrt(float(dx @ dx)), math.sqrt(float(dy @ dy))
    if sx == 0 or sy == 0:
        return None
    return max(-1.0, min(1.0, float(dx @ dy) / (sx * sy)))


def correlation_matrix(rows: PositionVectors, cols: PositionVectors) -> tuple[list[str], list[str], list[list[float | None]]]:
    r, c = rows.items(), cols.items()
    return [n for n, _ in r], [n for n, _ in c], [[pearson(a, b) for _, b in c] for _, a in r]

"""Comparison backbones built from shortest paths.

Edge betweenness counts how many geodesics cross an edge; edge salience
counts how many roots' shortest-path structures contain it. Both are scored
per edge in the order of ``g.edges``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from convskel.graph import Graph


@dataclass
class EdgeScores:
    kind: str
    scores: np.ndarray
    raw: np.ndarray | None = None

    def rows(self, g: Graph) -> list[tuple[str, str, float]]:
        lab = g.labels
        return [(lab[u], lab[v], float(s)) for (u, v), s in zip(g.edges, self.scores)]


def _bfs_dag(adj, source: int, n: int):
    dist = [-1] * n
    sigma = [0] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    order = []
    dist[source] = 0
    sigma[source] = 1
    queue = deque([source])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return order, dist, sigma, preds


def edge_betweenness(g: Graph) -> EdgeScores:
    """Fraction of geodesics, averaged over node pairs, that use each edge.

    ``raw`` holds the unnormalised pair-summed values
    ``sum_{u<v} sigma_uv(e) / sigma_uv``; ``scores`` divides by ``C(n, 2)``.
    """
    n = g.n
    adj = [sorted(a) for a in g.adj]
    idx = g.edge_index
    raw = np.zeros(g.m)
    for s in range(n):
        order, _, sigma, preds = _bfs_dag(adj, s, n)
        delta = [0.0] * n
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                c = sigma[v] * coeff
                raw[idx[(v, w) if v < w else (w, v)]] += c
                delta[v] += c
    raw /= 2.0  # each unordered pair seen from both ends
    pairs = n * (n - 1) / 2
    return EdgeScores("betweenness", raw / pairs if pairs else raw.copy(), raw)


def edge_salience(g: Graph, spt: str = "union") -> EdgeScores:
    """Fraction of roots whose shortest-path structure contains each edge.

    ``spt="union"`` uses the union of all geodesics from the root;
    ``spt="single"`` a single tree where each node keeps its smallest-index
    predecessor.
    """
    if spt not in ("union", "single"):
        raise ValueError(f"unknown spt mode {spt!r}")
    n = g.n
    adj = [sorted(a) for a in g.adj]
    idx = g.edge_index
    counts = np.zeros(g.m, dtype=np.int64)
    for r in range(n):
        _, _, _, preds = _bfs_dag(adj, r, n)
        for w in range(n):
            ps = preds[w] if spt == "union" else sorted(preds[w])[:1]
            for v in ps:
                counts[idx[(v, w) if v < w else (w, v)]] += 1
    return EdgeScores("salience", counts / n if n else counts.astype(float), counts)


def _rank_keep(g: Graph, scores: np.ndarray, k: int, high: bool) -> np.ndarray:
    # edges are already in lexicographic order, so a stable sort breaks ties lexicographically
    key = -scores if high else scores
    order = np.argsort(key, kind="stable")
    keep = np.zeros(g.m, dtype=bool)
    keep[order[:k]] = True
    return keep


def betweenness_backbone(g: Graph, target_edges: int, mode: str = "high",
                         scores: EdgeScores | None = None) -> Graph:
    """Keep the ``target_edges`` highest (or lowest) betweenness edges."""
    if not 1 <= target_edges <= g.m:
        raise ValueError("target_edges must be in [1, m]")
    if mode not in ("high", "low"):
        raise ValueError(f"unknown mode {mode!r}")
    scores = scores or edge_betweenness(g)
    return g.edge_subgraph(_rank_keep(g, scores.scores, target_edges, mode == "high"))


def salience_skeleton(g: Graph, threshold: float = 0.5, spt: str = "union",
                      scores: EdgeScores | None = None) -> Graph:
    """Keep edges with salience strictly above ``threshold``."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must be in (0, 1)")
    scores = scores or edge_salience(g, spt)
    return g.edge_subgraph(scores.scores > threshold)

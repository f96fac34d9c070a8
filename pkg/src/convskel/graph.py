"""Simple undirected graphs, file ingestion and descriptive statistics.

All distances are hop counts. Nodes are dense integer indices ``0..n-1``; the
original string labels are kept alongside so every output can be mapped back
to the input file.
"""

from __future__ import annotations

import logging
import math
import shlex
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from convskel import _kernels

log = logging.getLogger(__name__)

UNREACHABLE = -1


class GraphFormatError(ValueError):
    """Raised when an input file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Graph:
    """Immutable simple undirected graph.

    Edges are stored once each as ``(u, v)`` with ``u < v``, sorted
    lexicographically. Self-edges are dropped and parallel edges merged on
    construction (their weights summed).
    """

    def __init__(
        self,
        n: int,
        edges: Iterable[tuple[int, int]] | np.ndarray = (),
        weights: Sequence[float] | np.ndarray | None = None,
        labels: Sequence[str] | None = None,
        groups: Sequence[int] | np.ndarray | None = None,
        meta: dict | None = None,
    ):
        if n < 0:
            raise ValueError("n must be non-negative")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if weights is not None:
            w = np.asarray(weights, dtype=np.float64).reshape(-1)
            if len(w) != len(arr):
                raise ValueError("weights and edges differ in length")
            if np.any(w <= 0):
                raise ValueError("edge weights must be positive")
        else:
            w = None
        if len(arr) and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")

        keep = arr[:, 0] != arr[:, 1]
        self.dropped_self_loops = int(len(arr) - keep.sum())
        arr = arr[keep]
        if w is not None:
            w = w[keep]
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        keys = lo * max(n, 1) + hi
        uniq, inverse = np.unique(keys, return_inverse=True)
        self.dropped_duplicates = int(len(keys) - len(uniq))
        self._edges = np.column_stack([uniq // max(n, 1), uniq % max(n, 1)]).astype(np.int64)
        self._edges.setflags(write=False)
        if w is not None:
            agg = np.zeros(len(uniq))
            np.add.at(agg, inverse, w)
            agg.setflags(write=False)
            self._weights = agg
        else:
            self._weights = None

        self.n = int(n)
        if labels is None:
            labels = [str(i) for i in range(n)]
        if len(labels) != n:
            raise ValueError("need one label per node")
        self.labels: tuple[str, ...] = tuple(str(x) for x in labels)
        if groups is not None:
            groups = np.asarray(groups, dtype=np.int64)
            if len(groups) != n:
                raise ValueError("need one group per node")
            groups.setflags(write=False)
        self.groups = groups
        self.meta = dict(meta or {})

    # basic accessors

    @property
    def edges(self) -> np.ndarray:
        """``(m, 2)`` array of edges with ``u < v``; read-only."""
        return self._edges

    @property
    def weights(self) -> np.ndarray:
        """Per-edge weights (ones when the graph is unweighted)."""
        if self._weights is None:
            return np.ones(self.m)
        return self._weights

    @property
    def weighted(self) -> bool:
        return self._weights is not None

    @property
    def m(self) -> int:
        return len(self._edges)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self._edges, other._edges)
            and self.labels == other.labels
        )

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` adjacency with sorted neighbour lists."""
        n = self.n
        if self.m == 0:
            return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
        rows = np.concatenate([self._edges[:, 0], self._edges[:, 1]])
        cols = np.concatenate([self._edges[:, 1], self._edges[:, 0]])
        order = np.lexsort((cols, rows))
        rows, cols = rows[order], cols[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        indptr = np.cumsum(indptr)
        return indptr, cols.astype(np.int64)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.csr[0])

    @cached_property
    def adj(self) -> list[frozenset[int]]:
        indptr, indices = self.csr
        return [frozenset(indices[indptr[i] : indptr[i + 1]].tolist()) for i in range(self.n)]

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(int(u), int(v)): i for i, (u, v) in enumerate(self._edges)}

    def neighbors(self, i: int) -> np.ndarray:
        indptr, indices = self.csr
        return indices[indptr[i] : indptr[i + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self._edges}

    @cached_property
    def adjacency_matrix(self) -> sp.csr_matrix:
        indptr, indices = self.csr
        data = np.ones(len(indices), dtype=np.float64)
        return sp.csr_matrix((data, indices, indptr), shape=(self.n, self.n))

    @cached_property
    def component_labels(self) -> np.ndarray:
        """Component id per node; ids ordered by smallest member index."""
        indptr, indices = self.csr
        return _kernels.components(self.n, indptr, indices)

    @property
    def is_connected(self) -> bool:
        return self.n > 0 and int(self.component_labels.max()) == 0

    # derived graphs

    def edge_subgraph(self, keep: np.ndarray | Sequence[bool]) -> "Graph":
        """Graph on the same node set keeping edges where ``keep`` is true."""
        keep = np.asarray(keep, dtype=bool)
        w = self._weights[keep] if self._weights is not None else None
        return Graph(self.n, self._edges[keep], w, self.labels, self.groups, self.meta)

    def with_edges(self, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Same nodes, new edge set; weights carried over where edges exist."""
        edges = [(min(u, v), max(u, v)) for u, v in edges]
        if self._weights is None:
            return Graph(self.n, edges, None, self.labels, self.groups, self.meta)
        idx = self.edge_index
        w = [self._weights[idx[e]] if e in idx else 1.0 for e in edges]
        return Graph(self.n, edges, w, self.labels, self.groups, self.meta)

    def induced(self, nodes: Iterable[int]) -> "Graph":
        """Induced subgraph, relabelled densely in increasing index order."""
        nodes = np.array(sorted(set(int(x) for x in nodes)), dtype=np.int64)
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[nodes] = np.arange(len(nodes))
        e = self._edges
        keep = (remap[e[:, 0]] >= 0) & (remap[e[:, 1]] >= 0)
        new_edges = remap[e[keep]]
        w = self._weights[keep] if self._weights is not None else None
        labels = [self.labels[i] for i in nodes]
        groups = self.groups[nodes] if self.groups is not None else None
        return Graph(len(nodes), new_edges, w, labels, groups, self.meta)

    def check(self) -> None:
        """Assert the simple-graph invariants; used on generator output."""
        e = self._edges
        assert np.all(e[:, 0] < e[:, 1]), "edge not normalised or self-edge"
        keys = e[:, 0] * max(self.n, 1) + e[:, 1]
        assert len(np.unique(keys)) == len(keys), "parallel edge"
        assert int(self.degrees.sum()) == 2 * self.m


# ingestion


def load_graph(path: str | Path, format: str = "edgelist") -> Graph:
    """Read a graph from an edge list or a Pajek file.

    Self-edges and duplicate edges are dropped (duplicate weights summed);
    the counts are logged and kept in ``g.meta``.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8", errors="replace")
    if format == "edgelist":
        g = _parse_edgelist(text)
    elif format == "pajek":
        g = _parse_pajek(text)
    else:
        raise ValueError(f"unknown graph format {format!r}")
    if g.n == 0:
        raise GraphFormatError("empty graph")
    dropped = g.dropped_self_loops + g.dropped_duplicates
    g.meta.update(
        source=str(path),
        dropped_self_loops=g.dropped_self_loops,
        dropped_duplicates=g.dropped_duplicates,
    )
    if dropped:
        log.info("%s: dropped %d self-edges and %d duplicate edges", path,
                 g.dropped_self_loops, g.dropped_duplicates)
    return g


def _parse_edgelist(text: str) -> Graph:
    index: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    weights: list[float] = []
    explicit = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphFormatError(f"expected 'u v [w]', got {raw.strip()!r}", lineno)
        w = 1.0
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphFormatError(f"bad weight {parts[2]!r}", lineno) from None
            if not w > 0 or math.isinf(w):
                raise GraphFormatError(f"weight must be positive, got {parts[2]!r}", lineno)
            explicit = True
        u = index.setdefault(parts[0], len(index))
        v = index.setdefault(parts[1], len(index))
        edges.append((u, v))
        weights.append(w)
    labels = list(index)
    g = Graph(len(labels), edges, weights, labels)
    if not explicit and g.dropped_duplicates == 0:
        g._weights = None
    return g


def _parse_pajek(text: str) -> Graph:
    n = None
    labels: list[str] = []
    edges: list[tuple[int, int]] = []
    weights: list[float] = []
    explicit = False
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("*"):
            head = line.split()[0].lower()
            if head == "*vertices":
                try:
                    n = int(line.split()[1])
                except (IndexError, ValueError):
                    raise GraphFormatError("*Vertices needs a node count", lineno) from None
                labels = [str(i + 1) for i in range(n)]
                section = "vertices"
            elif head in ("*edges", "*arcs"):
                section = "edges"
            elif head in ("*edgeslist", "*arcslist"):
                section = "list"
            else:
                section = None  # unsupported section, skip its lines
            continue
        if n is None:
            raise GraphFormatError("data before *Vertices", lineno)
        try:
            parts = shlex.split(line, posix=True)
        except ValueError as exc:
            raise GraphFormatError(str(exc), lineno) from None
        try:
            if section == "vertices":
                i = int(parts[0])
                if not 1 <= i <= n:
                    raise GraphFormatError(f"vertex id {i} out of range", lineno)
                if len(parts) > 1:
                    labels[i - 1] = parts[1]
            elif section == "edges":
                u, v = int(parts[0]), int(parts[1])
                w = 1.0
                if len(parts) > 2:
                    w = float(parts[2])
                    explicit = True
                if not (1 <= u <= n and 1 <= v <= n):
                    raise GraphFormatError("edge endpoint out of range", lineno)
                if w <= 0:
                    raise GraphFormatError("weight must be positive", lineno)
                edges.append((u - 1, v - 1))
                weights.append(w)
            elif section == "list":
                u = int(parts[0])
                for x in parts[1:]:
                    edges.append((u - 1, int(x) - 1))
                    weights.append(1.0)
        except (IndexError, ValueError) as exc:
            if isinstance(exc, GraphFormatError):
                raise
            raise GraphFormatError(f"cannot parse {line!r}", lineno) from None
    if n is None:
        raise GraphFormatError("missing *Vertices section")
    g = Graph(n, edges, weights, labels)
    if not explicit and g.dropped_duplicates == 0:
        g._weights = None
    return g


def write_edgelist(g: Graph, path: str | Path, header: Sequence[str] = ()) -> None:
    """Write ``u v [w]`` lines using node labels; header lines become comments."""
    lines = [f"# {h}" for h in header]
    lab = g.labels
    if g.weighted:
        for (u, v), w in zip(g.edges, g.weights):
            lines.append(f"{lab[u]} {lab[v]} {w:g}")
    else:
        for u, v in g.edges:
            lines.append(f"{lab[u]} {lab[v]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# traversal


def largest_component(g: Graph) -> tuple[Graph, float]:
    """Induced subgraph on the largest component and its node fraction.

    Ties go to the component holding the smallest node index.
    """
    if g.n == 0:
        raise ValueError("empty graph")
    comp = g.component_labels
    sizes = np.bincount(comp)
    best = int(np.argmax(sizes))  # first max is the lowest-index component
    if sizes[best] == g.n:
        return g, 1.0
    nodes = np.flatnonzero(comp == best)
    return g.induced(nodes), len(nodes) / g.n


def bfs_geodesics(g: Graph, source: int) -> tuple[list[int], list[int]]:
    """Hop distances and exact geodesic counts from ``source``.

    Unreachable nodes get distance ``UNREACHABLE`` (-1) and count 0.
    """
    if not 0 <= source < g.n:
        raise IndexError(f"node {source} not in graph")
    dist = [UNREACHABLE] * g.n
    sigma = [0] * g.n
    dist[source] = 0
    sigma[source] = 1
    adj = g.adj
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
    return dist, sigma


def bridges(g: Graph) -> set[tuple[int, int]]:
    """Edges whose removal increases the number of components (Tarjan)."""
    adj = [sorted(a) for a in g.adj]
    disc = [-1] * g.n
    low = [0] * g.n
    out: set[tuple[int, int]] = set()
    timer = 0
    for root in range(g.n):
        if disc[root] >= 0:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, 0)]
        while stack:
            v, parent, i = stack[-1]
            if i < len(adj[v]):
                stack[-1] = (v, parent, i + 1)
                w = adj[v][i]
                if w == parent:
                    continue
                if disc[w] < 0:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, v, 0))
                else:
                    low[v] = min(low[v], disc[w])
            else:
                stack.pop()
                if parent >= 0:
                    low[parent] = min(low[parent], low[v])
                    if low[v] > disc[parent]:
                        out.add((min(v, parent), max(v, parent)))
    return out


# statistics


@dataclass
class StatsReport:
    n: int
    m: int
    avg_degree: float
    avg_clustering: float
    avg_distance: float
    avg_geodesics: float
    pendant: int
    avg_weight: float | None
    lcc_fraction: float
    connected_pairs: int
    pairs_policy: str = "connected-pairs"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "avg_k": self.avg_degree,
            "avg_C": self.avg_clustering,
            "avg_l": self.avg_distance,
            "avg_sigma": self.avg_geodesics,
            "n1": self.pendant,
            "avg_w": self.avg_weight,
            "s": self.lcc_fraction,
            "connected_pairs": self.connected_pairs,
            "pairs_policy": self.pairs_policy,
        }


def triangles(g: Graph) -> np.ndarray:
    """Number of triangles through each node."""
    a = g.adjacency_matrix
    return np.asarray((a @ a).multiply(a).sum(axis=1)).ravel().astype(np.int64) // 2


def clustering(g: Graph) -> np.ndarray:
    """Local clustering ``2 t_i / (k_i (k_i - 1))``, zero when ``k_i < 2``."""
    k = g.degrees.astype(np.float64)
    t = triangles(g).astype(np.float64)
    denom = k * (k - 1)
    out = np.zeros(g.n)
    np.divide(2 * t, denom, out=out, where=denom > 0)
    return out


def pair_statistics(g: Graph) -> tuple[int, float, float, np.ndarray]:
    """Connected pair count, summed distance, summed geodesic count, distance histogram."""
    indptr, indices = g.csr
    pairs, dsum, ssum, hist = _kernels.all_pairs_summary(g.n, indptr, indices)
    # every unordered pair was counted twice
    return int(pairs) // 2, dsum / 2.0, ssum / 2.0, hist // 2


def stats(g: Graph) -> StatsReport:
    """Descriptive statistics; distance means run over connected pairs only."""
    n, m = g.n, g.m
    pairs, dsum, ssum, _ = pair_statistics(g)
    sizes = np.bincount(g.component_labels) if n else np.array([0])
    return StatsReport(
        n=n,
        m=m,
        avg_degree=2 * m / n if n else 0.0,
        avg_clustering=float(clustering(g).mean()) if n else 0.0,
        avg_distance=dsum / pairs if pairs else 0.0,
        avg_geodesics=ssum / pairs if pairs else 1.0,
        pendant=int(np.sum(g.degrees == 1)),
        avg_weight=float(g.weights.mean()) if g.weighted and m else None,
        lcc_fraction=float(sizes.max() / n) if n else 0.0,
        connected_pairs=pairs,
    )


@dataclass
class Distribution:
    kind: str
    values: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    mass: np.ndarray = field(default_factory=lambda: np.zeros(0))
    empty_reason: str | None = None

    @property
    def empty(self) -> bool:
        return len(self.values) == 0

    def as_dict(self) -> dict:
        return {int(v) if float(v).is_integer() else float(v): float(p) for v, p in zip(self.values, self.mass)}


def _normalised(kind: str, values: np.ndarray, counts: np.ndarray) -> Distribution:
    keep = counts > 0
    values, counts = values[keep], counts[keep].astype(np.float64)
    return Distribution(kind, values, counts / counts.sum())


def distributions(g: Graph) -> dict[str, Distribution]:
    """Degree ``p_k``, distance ``p_d`` and weight ``p_w`` distributions."""
    out = {}
    deg_counts = np.bincount(g.degrees) if g.n else np.zeros(0, dtype=np.int64)
    out["p_k"] = _normalised("p_k", np.arange(len(deg_counts)), deg_counts)
    _, _, _, hist = pair_statistics(g)
    hist = hist.copy()
    hist[0] = 0
    out["p_d"] = _normalised("p_d", np.arange(len(hist)), hist) if hist.sum() else Distribution("p_d", empty_reason="no connected pairs")
    if g.weighted and g.m:
        vals, counts = np.unique(g.weights, return_counts=True)
        out["p_w"] = Distribution("p_w", vals, counts / counts.sum())
    else:
        out["p_w"] = Distribution("p_w", empty_reason="graph is unweighted")
    return out

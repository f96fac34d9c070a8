"""Shared fixtures and brute-force oracles.

The oracles deliberately share no code with the package: distances come from
Floyd-Warshall and geodesics from explicit path enumeration.
"""

from __future__ import annotations

import itertools
import os
from pathlib import Path

import networkx as nx
import numpy as np
import pytest
from hypothesis import strategies as st

from convskel.graph import Graph, load_graph

DATA_DIR = Path(__file__).parent / "data"
NETSCI_ENV = "CONVSKEL_NETSCI"
COMPSCI_ENV = "CONVSKEL_COMPSCI"
COMPSCI_FIELDS_ENV = "CONVSKEL_COMPSCI_FIELDS"


def from_nx(h: nx.Graph) -> Graph:
    h = nx.convert_node_labels_to_integers(h, ordering="sorted")
    return Graph(h.number_of_nodes(), list(h.edges()))


def floyd(g: Graph) -> np.ndarray:
    n = g.n
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0)
    for u, v in g.edges:
        d[u, v] = d[v, u] = 1
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def all_geodesics(g: Graph, d: np.ndarray, u: int, v: int) -> list[tuple[int, ...]]:
    """Every shortest path from ``u`` to ``v`` by depth-first enumeration."""
    if not np.isfinite(d[u, v]):
        return []
    out = []
    adj = [sorted(a) for a in g.adj]

    def walk(path):
        x = path[-1]
        if x == v:
            out.append(tuple(path))
            return
        for y in adj[x]:
            if d[y, v] == d[x, v] - 1:
                walk(path + [y])

    walk([u])
    return out


def geodesic_nodes(g: Graph, d: np.ndarray | None = None) -> dict[tuple[int, int], frozenset[int]]:
    """Nodes on any shortest path, per connected pair ``u < v``, by enumeration."""
    d = floyd(g) if d is None else d
    out = {}
    for u, v in itertools.combinations(range(g.n), 2):
        out[(u, v)] = frozenset(x for path in all_geodesics(g, d, u, v) for x in path)
    return out


def brute_hull(g: Graph, seeds, d: np.ndarray | None = None, nodes=None) -> frozenset[int]:
    """Close ``seeds`` under "add every node of every geodesic between members"."""
    nodes = geodesic_nodes(g, d) if nodes is None else nodes
    cur = set(seeds)
    while True:
        new = set(cur)
        for u, v in itertools.combinations(sorted(cur), 2):
            new |= nodes[(u, v)]
        if new == cur:
            return frozenset(cur)
        cur = new


def connected_subsets(g: Graph, max_size: int):
    """All node subsets of size <= ``max_size`` inducing a connected subgraph."""
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(map(tuple, g.edges))
    for k in range(1, max_size + 1):
        for sub in itertools.combinations(range(g.n), k):
            if nx.is_connected(h.subgraph(sub)):
                yield sub


@st.composite
def graphs(draw, min_n=1, max_n=12, connected=False):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    if connected and n > 1:
        # add a random spanning path so the graph is connected
        perm = draw(st.permutations(range(n)))
        chosen = list(chosen) + [(min(a, b), max(a, b)) for a, b in zip(perm, perm[1:])]
    return Graph(n, chosen)


def random_graph(rng: np.random.Generator, n: int, p: float, connected: bool = True) -> Graph:
    while True:
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
        g = Graph(n, edges)
        if not connected or g.is_connected:
            return g


def _dataset(env: str, names: list[str]) -> tuple[Path, str] | None:
    candidates = [os.environ.get(env)] + [str(DATA_DIR / x) for x in names]
    for c in candidates:
        if c and Path(c).exists():
            fmt = "pajek" if c.lower().endswith((".net", ".paj")) else "edgelist"
            return Path(c), fmt
    return None


@pytest.fixture(scope="session")
def netsci():
    """Largest component of the network scientists coauthorship network, if supplied."""
    from convskel.graph import largest_component

    found = _dataset(NETSCI_ENV, ["netscience.net", "netscience.edges", "netsci.edges"])
    if found is None:
        pytest.skip(f"network scientists dataset not supplied (set {NETSCI_ENV} or add tests/data/netscience.net)")
    g, _ = largest_component(load_graph(*found))
    return g


@pytest.fixture(scope="session")
def compsci():
    """Computer scientists coauthorship network and field partition file, if supplied."""
    from convskel.graph import largest_component

    found = _dataset(COMPSCI_ENV, ["compsci.net", "compsci.edges"])
    fields = os.environ.get(COMPSCI_FIELDS_ENV) or str(DATA_DIR / "compsci.fields")
    if found is None or not Path(fields).exists():
        pytest.skip(f"coauthorship dataset not supplied (set {COMPSCI_ENV} and {COMPSCI_FIELDS_ENV})")
    g, _ = largest_component(load_graph(*found))
    return g, Path(fields)


# acceptance reporting: one line per criterion at the end of the run

_CRITERIA: dict[int, dict] = {}
_RANK = {"PASS": 0, "SKIP": 1, "FAIL": 2}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        if rep.skipped:
            status, detail = "SKIP", str(rep.longrepr[2]) if isinstance(rep.longrepr, tuple) else ""
        elif rep.failed:
            status, detail = "FAIL", rep.longrepr.reprcrash.message if hasattr(rep.longrepr, "reprcrash") else ""
        else:
            status = "PASS"
            detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
        entry = _CRITERIA.setdefault(number, {"title": title, "parts": []})
        entry["parts"].append((status, detail.replace("\n", " ")[:160]))


def pytest_terminal_summary(terminalreporter):
    """A criterion passes only if all of its parts pass; skipped parts are shown as such."""
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = max((s for s, _ in entry["parts"]), key=_RANK.get)
        details = [f"{s.lower()}: {d}" if len(entry["parts"]) > 1 else d for s, d in entry["parts"] if d or s != "PASS"]
        line = f"criterion {number:2d} {status:4s} {entry['title']}"
        terminalreporter.write_line(line + (f" [{' | '.join(details)}]" if details else ""))

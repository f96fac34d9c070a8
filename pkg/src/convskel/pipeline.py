"""Per-dataset comparison of a network, its convex skeletons and spanning trees."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from convskel import seeding
from convskel.convexity import measure_corrected
from convskel.graph import Graph, largest_component, load_graph, stats
from convskel.metrics import ged_matrix
from convskel.skeleton import skeleton_clustering, spanning_tree


def _row(g: Graph, runs: int, seed: int, jobs: int) -> dict:
    st = stats(g)
    rep = measure_corrected(g, runs, seed, jobs=jobs)
    return {"avg_k": st.avg_degree, "avg_C": st.avg_clustering, "avg_sigma": st.avg_geodesics,
            "avg_l": st.avg_distance, "Xs": rep.Xs}


def _mean(rows: list[dict]) -> dict:
    return {k: float(np.mean([r[k] for r in rows])) for k in rows[0]}


def table1(path: str | Path, graph_format: str = "edgelist", realisations: int = 25, runs: int = 100,
           seed: int = 0, batch: float = 0.01, jobs: int = 1, tie_break: str = "random") -> dict:
    """Averages over ``realisations`` skeletons and spanning trees of the dataset's LCC.

    Skeleton realisations differ only through tie-breaking among equal
    scores, so the default here is a seeded shuffle rather than index order.
    """
    g, _ = largest_component(load_graph(path, graph_format))
    out = {"network": Path(path).stem, "n": g.n, "realisations": realisations, "runs": runs,
           "tie_break": tie_break}
    parts = {"N": _row(g, runs, seeding.child_seed(seed, 0), jobs)}
    skeletons, cs_rows, st_rows = [], [], []
    for r in range(realisations):
        res = skeleton_clustering(g, batch, "delta-c", seeding.child_seed(seed, 1, r), tie_break=tie_break)
        skeletons.append(res.graph)
        cs_rows.append(_row(res.graph, runs, seeding.child_seed(seed, 2, r), jobs))
        st = spanning_tree(g, seeding.child_seed(seed, 3, r))
        st_rows.append(_row(st, runs, seeding.child_seed(seed, 4, r), jobs))
    parts["CS"], parts["ST"] = _mean(cs_rows), _mean(st_rows)
    for part, vals in parts.items():
        for k, v in vals.items():
            out[f"{k}_{part}"] = v
    out["CS_kept_fraction"] = float(np.mean([s.m for s in skeletons])) / g.m
    if realisations > 1:
        d = ged_matrix(skeletons)
        iu = np.triu_indices(realisations, 1)
        out["CS_mean_ged_fraction"] = float(d[iu].mean()) / g.m
    else:
        out["CS_mean_ged_fraction"] = 0.0
    return out

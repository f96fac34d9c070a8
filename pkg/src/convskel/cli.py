"""Command-line front end.

Every subcommand writes its artifacts plus a ``manifest.json`` into ``--out``.
``convskel replay --manifest DIR/manifest.json`` re-runs the recorded command
and reproduces the artifacts byte for byte.

Exit status: 0 on success, 2 on usage errors, 1 on data errors (reported as a
single ``error: <kind>: <message>`` line on stderr).
"""

from __future__ import annotations

import functools
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from convskel import __version__, seeding
from convskel import backbones as bb
from convskel import convexity as cv
from convskel import ensembles as ens
from convskel import metrics as mt
from convskel import skeleton as sk
from convskel.graph import Graph, distributions, largest_component, load_graph, stats, write_edgelist
from convskel.output import write_json, write_tsv

OUT_ENV = "CONVSKEL_OUT"
MANIFEST = "manifest.json"
FAST_RUNS = 50
FAST_REALISATIONS = 5

log = logging.getLogger("convskel")


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _input_paths(params: dict) -> list[str]:
    paths = []
    for key in ("input", "partition", "p1", "p2"):
        if params.get(key):
            paths.append(params[key])
    for key in ("inputs", "datasets"):
        paths.extend(params.get(key) or ())
    return paths


def _is_default(ctx: click.Context, name: str) -> bool:
    src = ctx.get_parameter_source(name)
    return src is not None and src.name in ("DEFAULT", "DEFAULT_MAP")


def artifact(fn):
    """Wrap a subcommand: resolve ``--out``, write the manifest, map errors to exit 1."""

    @functools.wraps(fn)
    @click.pass_context
    def wrapper(ctx: click.Context, **params):
        out = Path(params.get("out") or os.environ.get(OUT_ENV) or ".")
        out.mkdir(parents=True, exist_ok=True)
        params["out"] = str(out)
        if params.get("fast"):
            if "runs" in params and _is_default(ctx, "runs"):
                params["runs"] = FAST_RUNS
            if "realisations" in params and _is_default(ctx, "realisations"):
                params["realisations"] = FAST_REALISATIONS
        began = time.perf_counter()
        try:
            summary = fn(out=out, **{k: v for k, v in params.items() if k != "out"})
        except (ValueError, OSError, KeyError, IndexError) as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}".replace("\n", " "), err=True)
            ctx.exit(1)
        manifest = {
            "subcommand": ctx.info_name,
            "params": {k: list(v) if isinstance(v, tuple) else v for k, v in params.items()},
            "seed": params.get("seed"),
            "inputs": {p: _digest(p) for p in _input_paths(params)},
            "version": __version__,
            "duration_s": round(time.perf_counter() - began, 3),
        }
        write_json(out / MANIFEST, manifest)
        if summary is not None:
            click.echo(json.dumps(summary, sort_keys=True, default=str))

    return wrapper


def _load(path: str, graph_format: str, lcc: bool = False) -> Graph:
    g = load_graph(path, graph_format)
    if lcc:
        g, _ = largest_component(g)
    return g


def common(fn):
    fn = click.option("--jobs", type=click.IntRange(1), default=1, show_default=True,
                      help="Worker threads for Monte Carlo runs (results do not depend on it).")(fn)
    fn = click.option("--fast", is_flag=True, help="Desk-scale defaults: fewer runs and realisations.")(fn)
    fn = click.option("--format", "fmt", type=click.Choice(["tsv", "json"]), default="json", show_default=True)(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--out", type=click.Path(file_okay=False), default=None,
                      help=f"Output directory (default ${OUT_ENV} or '.').")(fn)
    return fn


def graph_input(fn):
    fn = click.option("--lcc", is_flag=True, help="Reduce the input to its largest component.")(fn)
    fn = click.option("--graph-format", type=click.Choice(["edgelist", "pajek"]), default="edgelist",
                      show_default=True)(fn)
    fn = click.option("--input", "input", type=click.Path(exists=True, dir_okay=False), required=True)(fn)
    return fn


def runs_option(default: int = cv.DEFAULT_RUNS):
    return click.option("--runs", type=click.IntRange(1), default=default, show_default=True,
                        help="Convex expansion runs.")


def _emit(out: Path, name: str, fmt: str, record: dict) -> None:
    if fmt == "json":
        write_json(out / f"{name}.json", record)
    else:
        write_tsv(out / f"{name}.tsv", ["key", "value"], sorted(record.items()))


@click.group()
@click.version_option(__version__)
@click.option("-v", "--verbose", is_flag=True)
def main(verbose: bool) -> None:
    """Network convexity and convex skeletons."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(message)s")


@main.command("stats")
@graph_input
@common
@artifact
def stats_cmd(out, input, graph_format, lcc, seed, fmt, fast, jobs):
    """Descriptive statistics and degree/distance/weight distributions."""
    g = _load(input, graph_format, lcc)
    rep = stats(g).to_dict()
    _emit(out, "stats", fmt, rep)
    rows = []
    for kind, dist in distributions(g).items():
        rows.extend((kind, v, p) for v, p in zip(dist.values, dist.mass))
    write_tsv(out / "distributions.tsv", ["kind", "value", "mass"], rows)
    return rep


@main.command("convexity")
@graph_input
@runs_option()
@click.option("--trace", is_flag=True, help="Include the mean s(t) trace.")
@common
@artifact
def convexity_cmd(out, input, graph_format, lcc, runs, trace, seed, fmt, fast, jobs):
    """Convexity X and corrected convexity Xs."""
    g = _load(input, graph_format, lcc)
    rep = cv.measure_corrected(g, runs, seed, jobs=jobs).to_dict(trace=trace)
    _emit(out, "convexity", fmt, rep)
    return {k: rep[k] for k in ("X", "Xs", "s", "runs", "pendant_bound", "ci99")}


@main.command("hull")
@graph_input
@click.option("--nodes", required=True, help="Comma-separated node labels.")
@common
@artifact
def hull_cmd(out, input, graph_format, lcc, nodes, seed, fmt, fast, jobs):
    """Convex hull of a node set."""
    g = _load(input, graph_format, lcc)
    index = {lab: i for i, lab in enumerate(g.labels)}
    wanted = [x.strip() for x in nodes.split(",") if x.strip()]
    missing = [x for x in wanted if x not in index]
    if missing:
        raise KeyError(f"unknown nodes {missing}")
    h = sorted(cv.convex_hull(g, [index[x] for x in wanted]))
    write_tsv(out / "hull.tsv", ["label"], [(g.labels[i],) for i in h])
    return {"seed_size": len(wanted), "hull_size": len(h)}


@main.command("expand")
@graph_input
@click.option("--run", type=int, default=0, show_default=True, help="Run index under --seed.")
@common
@artifact
def expand_cmd(out, input, graph_format, lcc, run, seed, fmt, fast, jobs):
    """Single convex expansion run: s(t) per step."""
    g = _load(input, graph_format, lcc)
    tr = cv.expansion_run(g, seed, run)
    write_tsv(out / "trace.tsv", ["t", "size", "s"], [(t, int(x), x / g.n) for t, x in enumerate(tr.sizes)])
    return {"cover_step": tr.cover_step, "X_run": tr.convexity, "start": g.labels[tr.start]}


@main.command("ccore")
@graph_input
@runs_option()
@click.option("--t-threshold", type=click.IntRange(1), default=cv.DEFAULT_T_THRESHOLD, show_default=True)
@click.option("--majority", type=float, default=0.5, show_default=True)
@common
@artifact
def ccore_cmd(out, input, graph_format, lcc, runs, t_threshold, majority, seed, fmt, fast, jobs):
    """Per-node c-core probability p and c-centrality c."""
    g = _load(input, graph_format, lcc)
    prof = cv.ccore_profile(g, runs, t_threshold, seed, majority, jobs)
    write_tsv(out / "ccore.tsv", ["label", "p", "c", "core"], prof.rows(g))
    return {"core_size": int(prof.core.sum()), "n": g.n, "t_threshold": t_threshold, "runs": runs}


def _write_skeleton(out: Path, g: Graph, res: sk.SkeletonResult, final_runs: int, seed: int, jobs: int) -> dict:
    write_edgelist(res.graph, out / "skeleton.edges", header=[f"{k}={v}" for k, v in sorted(res.meta.items())])
    write_tsv(out / "removals.tsv", ["step", "batch", "u", "v", "score"], res.removal_rows(g))
    write_tsv(out / "checkpoints.tsv", ["frac_removed", "Xs", "X", "s", "avgC"], res.checkpoint_rows())
    st = stats(res.graph)
    rep = cv.measure_corrected(res.graph, final_runs, seed, jobs=jobs)
    summary = dict(
        m_input=g.m, m_skeleton=res.graph.m, kept_fraction=res.kept_fraction, avg_k=st.avg_degree,
        avg_C=st.avg_clustering, avg_sigma=st.avg_geodesics, avg_l=st.avg_distance,
        Xs=rep.Xs, X=rep.X, s=rep.s, stop_reason=res.stop_reason, meta=res.meta,
    )
    write_json(out / "skeleton.json", summary)
    return summary


@main.command("skeleton")
@graph_input
@click.option("--method", type=click.Choice(["clustering", "ccentrality"]), default="clustering", show_default=True)
@click.option("--batch", type=float, default=0.01, show_default=True, help="Fraction of edges per batch.")
@click.option("--stop", type=click.Choice(list(sk.STOP_POLICIES)), default="delta-c", show_default=True)
@click.option("--target-edges", type=click.IntRange(0), default=None)
@click.option("--checkpoint-runs", type=click.IntRange(0), default=10, show_default=True)
@click.option("--profile-runs", type=click.IntRange(1), default=10, show_default=True,
              help="Expansion runs per c-profile refresh (ccentrality).")
@click.option("--refresh", type=click.IntRange(1), default=1, show_default=True)
@click.option("--max-fraction", type=float, default=0.6, show_default=True)
@click.option("--keep-connected/--allow-disconnect", default=None,
              help="Skip bridges (default: on for clustering, off for ccentrality).")
@click.option("--tie-break", type=click.Choice(["lex", "random"]), default="lex", show_default=True,
              help="Order among equal scores: by endpoint indices, or a seeded shuffle.")
@runs_option()
@common
@artifact
def skeleton_cmd(out, input, graph_format, lcc, method, batch, stop, target_edges, checkpoint_runs,
                 profile_runs, refresh, max_fraction, keep_connected, tie_break, runs, seed, fmt, fast, jobs):
    """Extract a convex skeleton by targeted edge removal."""
    g = _load(input, graph_format, lcc)
    if method == "clustering":
        res = sk.skeleton_clustering(g, batch, stop, seed, target_edges, checkpoint_runs,
                                     True if keep_connected is None else keep_connected, tie_break)
    else:
        res = sk.skeleton_ccentrality(g, profile_runs, seed, refresh=refresh, checkpoint_runs=checkpoint_runs,
                                      max_fraction=max_fraction,
                                      keep_connected=bool(keep_connected), tie_break=tie_break)
    summary = _write_skeleton(out, g, res, runs, seed, jobs)
    return {k: summary[k] for k in ("m_input", "m_skeleton", "avg_C", "Xs", "stop_reason")}


@main.command("spanning-tree")
@graph_input
@common
@artifact
def spanning_tree_cmd(out, input, graph_format, lcc, seed, fmt, fast, jobs):
    """Uniform random spanning tree."""
    g = _load(input, graph_format, lcc)
    t = sk.spanning_tree(g, seed)
    write_edgelist(t, out / "tree.edges", header=[f"spanning-tree seed={seed}"])
    return {"n": t.n, "m": t.m}


@main.command("backbone")
@graph_input
@click.option("--kind", type=click.Choice(["betweenness-high", "betweenness-low", "salience"]), required=True)
@click.option("--target-edges", type=click.IntRange(1), default=None)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--spt", type=click.Choice(["union", "single"]), default="union", show_default=True)
@common
@artifact
def backbone_cmd(out, input, graph_format, lcc, kind, target_edges, threshold, spt, seed, fmt, fast, jobs):
    """High/low edge-betweenness backbone or high-salience skeleton."""
    g = _load(input, graph_format, lcc)
    if kind == "salience":
        scores = bb.edge_salience(g, spt)
        b = bb.salience_skeleton(g, threshold, scores=scores)
    else:
        if target_edges is None:
            raise click.UsageError("--target-edges is required for betweenness backbones")
        scores = bb.edge_betweenness(g)
        b = bb.betweenness_backbone(g, target_edges, kind.split("-")[1], scores=scores)
    write_tsv(out / "scores.tsv", ["u", "v", "score"], scores.rows(g))
    write_edgelist(b, out / "backbone.edges", header=[f"backbone kind={kind}"])
    return {"m_input": g.m, "m_backbone": b.m}


@main.command("rewire")
@graph_input
@click.option("--mode", type=click.Choice(["degree", "full"]), default="degree", show_default=True)
@click.option("--fraction", type=click.FloatRange(0), required=True)
@common
@artifact
def rewire_cmd(out, input, graph_format, lcc, mode, fraction, seed, fmt, fast, jobs):
    """Degree-preserving or full edge rewiring."""
    g = _load(input, graph_format, lcc)
    fn = ens.rewire_degree_preserving if mode == "degree" else ens.rewire_full
    r = fn(g, fraction, seed)
    write_edgelist(r.graph, out / "rewired.edges", header=[f"rewire mode={mode} fraction={fraction} seed={seed}"])
    rec = {"swaps": r.swaps, "requested": r.requested, "attempts": r.attempts, "complete": r.complete}
    write_json(out / "rewire.json", rec)
    return rec


@main.command("generate")
@click.option("--kind", type=click.Choice(["er", "lattice-rect", "lattice-tri", "random-tree", "convex",
                                           "core-periphery"]), required=True)
@click.option("--n", type=click.IntRange(1), default=None)
@click.option("--avg-k", type=float, default=None)
@click.option("--side", type=click.IntRange(2), default=None)
@click.option("--t", type=float, default=None, help="Tree fraction for convex graphs.")
@click.option("--core-fraction", type=float, default=None)
@click.option("--density-core", type=float, default=None)
@click.option("--density-cross", type=float, default=None)
@click.option("--density-periphery", type=float, default=0.0, show_default=True)
@click.option("--tree-model", type=click.Choice(["attach", "uniform"]), default=None,
              help="random-tree: uniform attachment (default) or uniform labelled tree.")
@click.option("--reattach", type=click.Choice(["all", "connected"]), default=None,
              help="core-periphery: targets for isolated nodes (default all).")
@common
@artifact
def generate_cmd(out, kind, n, avg_k, side, t, core_fraction, density_core, density_cross, density_periphery,
                 tree_model, reattach, seed, fmt, fast, jobs):
    """Synthetic graphs; the config is echoed as header comments."""
    cfg = ens.GeneratorConfig(kind, seed, n, avg_k, side, t, core_fraction, density_core, density_cross,
                              density_periphery, tree_model, reattach)
    needed = {"er": ("n", "avg_k"), "lattice-rect": ("side",), "lattice-tri": ("side",), "random-tree": ("n",),
              "convex": ("n", "t"), "core-periphery": ("n", "core_fraction", "density_core", "density_cross")}
    missing = [k for k in needed[kind] if getattr(cfg, k) is None]
    if missing:
        raise click.UsageError(f"--kind {kind} needs " + ", ".join("--" + k.replace("_", "-") for k in missing))
    g = ens.generate(cfg)
    g.check()
    write_edgelist(g, out / "graph.edges", header=["generated by convskel " + __version__] + cfg.header())
    if g.groups is not None:
        write_tsv(out / "groups.tsv", ["label", "group"], zip(g.labels, g.groups))
    return {"n": g.n, "m": g.m, "avg_k": 2 * g.m / g.n}


@main.command("ged")
@click.option("--inputs", multiple=True, type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--graph-format", type=click.Choice(["edgelist", "pajek"]), default="edgelist", show_default=True)
@click.option("--reference", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Graph whose node set the inputs share (isolated nodes may be absent from edge lists).")
@common
@artifact
def ged_cmd(out, inputs, graph_format, reference, seed, fmt, fast, jobs):
    """Pairwise graph edit distance matrix."""
    graphs = [load_graph(p, graph_format) for p in inputs]
    if reference:
        ref = load_graph(reference, graph_format)
        graphs = [_align(ref, g) for g in graphs]
    d = mt.ged_matrix(graphs)
    names = [Path(p).name for p in inputs]
    write_tsv(out / "ged.tsv", [""] + names, [[names[i]] + list(d[i]) for i in range(len(names))])
    iu = np.triu_indices(len(graphs), 1)
    mean = float(d[iu].mean()) if len(iu[0]) else 0.0
    return {"graphs": len(graphs), "mean_ged": mean}


def _align(ref: Graph, g: Graph) -> Graph:
    index = {lab: i for i, lab in enumerate(ref.labels)}
    try:
        edges = [(index[g.labels[u]], index[g.labels[v]]) for u, v in g.edges]
    except KeyError as exc:
        raise mt.NodeSetMismatch(f"node {exc.args[0]!r} not in reference graph") from None
    return Graph(ref.n, edges, labels=ref.labels)


@main.command("compare-partitions")
@graph_input
@click.option("--p1", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--p2", type=click.Path(exists=True, dir_okay=False), required=True)
@common
@artifact
def compare_partitions_cmd(out, input, graph_format, lcc, p1, p2, seed, fmt, fast, jobs):
    """NMI and NVI between two partitions of the nodes of --input."""
    g = _load(input, graph_format, lcc)
    a, b = mt.read_partition(p1, g), mt.read_partition(p2, g)
    rec = {"nmi": mt.nmi(a, b), "nmi_max": mt.nmi(a, b, "max"), "nvi": mt.nvi(a, b),
           "communities_p1": a.count, "communities_p2": b.count, "nmi_normalisation": "arithmetic"}
    _emit(out, "partitions", fmt, rec)
    return rec


@main.command("modularity")
@graph_input
@click.option("--partition", type=click.Path(exists=True, dir_okay=False), required=True)
@common
@artifact
def modularity_cmd(out, input, graph_format, lcc, partition, seed, fmt, fast, jobs):
    """Modularity Q and inter-group tie fraction of a node classification."""
    g = _load(input, graph_format, lcc)
    p = mt.read_partition(partition, g)
    rec = {"Q": mt.modularity(g, p), "inter_group_fraction": mt.inter_group_fraction(g, p),
           "communities": p.count}
    _emit(out, "modularity", fmt, rec)
    return rec


@main.command("position")
@graph_input
@runs_option()
@click.option("--damping", type=float, default=0.85, show_default=True)
@common
@artifact
def position_cmd(out, input, graph_format, lcc, runs, damping, seed, fmt, fast, jobs):
    """Per-node position scores and their Pearson correlation matrix."""
    g = _load(input, graph_format, lcc)
    pv = mt.position_vectors(g, runs, seed, damping)
    items = pv.items()
    write_tsv(out / "position.tsv", ["label"] + [k for k, _ in items],
              [[g.labels[i]] + [v[i] for _, v in items] for i in range(g.n)])
    rows, cols, mat = mt.correlation_matrix(pv, pv)
    write_tsv(out / "correlations.tsv", [""] + cols, [[r] + row for r, row in zip(rows, mat)])
    return {"measures": [k for k, _ in items]}


@main.command("pipeline")
@click.option("--datasets", multiple=True, type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--graph-format", type=click.Choice(["edgelist", "pajek"]), default="edgelist", show_default=True)
@click.option("--realisations", type=click.IntRange(1), default=25, show_default=True)
@click.option("--batch", type=float, default=0.01, show_default=True)
@runs_option()
@common
@artifact
def pipeline_cmd(out, datasets, graph_format, realisations, batch, runs, seed, fmt, fast, jobs):
    """Network / convex skeleton / spanning tree statistics per dataset."""
    from convskel.pipeline import table1

    rows = []
    try:
        for i, path in enumerate(datasets):
            rows.append(table1(path, graph_format, realisations, runs, seeding.child_seed(seed, i), batch, jobs))
    finally:
        _write_table1(out, rows, fmt)
    return {"datasets": len(rows)}


def _write_table1(out: Path, rows: list[dict], fmt: str) -> None:
    if fmt == "json":
        write_json(out / "table1.json", rows)
        return
    cols = ["network", "n", "realisations", "runs"]
    for stat in ("avg_k", "avg_C", "avg_sigma", "Xs"):
        cols += [f"{stat}_{part}" for part in ("N", "CS", "ST")]
    cols += ["CS_kept_fraction", "CS_mean_ged_fraction"]
    write_tsv(out / "table1.tsv", cols, [[r.get(c) for c in cols] for r in rows])


@main.command("replay")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Where to write the replayed artifacts (default: the recorded directory).")
@click.pass_context
def replay_cmd(ctx: click.Context, manifest_path: str, out: str | None) -> None:
    """Re-run a command from its manifest."""
    rec = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    cmd = main.commands.get(rec["subcommand"])
    if cmd is None or cmd is replay_cmd:
        click.echo(f"error: ManifestError: cannot replay {rec['subcommand']!r}", err=True)
        ctx.exit(1)
    for path, digest in rec.get("inputs", {}).items():
        if not Path(path).exists() or _digest(path) != digest:
            click.echo(f"error: ManifestError: input {path} missing or changed", err=True)
            ctx.exit(1)
    params = dict(rec["params"])
    if out is not None:
        params["out"] = out
    known = {p.name for p in cmd.params}
    ctx.invoke(cmd, **{k: tuple(v) if isinstance(v, list) else v for k, v in params.items() if k in known})


def run(argv: list[str] | None = None) -> int:
    """Invoke the CLI without exiting the interpreter; returns the exit code."""
    try:
        main.main(args=argv, prog_name="convskel", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line harness for the traversal engine."""

from __future__ import annotations

import json
import math
import pathlib
import sys

import click

from . import bench as bench_mod
from . import engine, fi, generate, ls, plots, storage
from .errors import ColgraphError
from .predicate import parse


@click.group()
def main():
    """Columnar graph traversal engine and benchmark harness."""


def _fail(exc):
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


def _load(graph_path, vertex_path=None):
    return storage.load_tsv(graph_path, vertex_path)


def _cluster(g, mode):
    return bench_mod.apply_clustering(g, mode)


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--vertices", "vertex_path", type=click.Path(exists=True),
              default=None, help="Optional vertex attribute file.")
def load(path, vertex_path):
    """Load a TSV edge file and print a summary."""
    try:
        vgroup, g = _load(path, vertex_path)
    except ColgraphError as exc:
        _fail(exc)
    click.echo(f"|V|={vgroup.vertex_count} |E|={g.edge_count}")


@main.command("generate")
@click.argument("kind", type=click.Choice(sorted(generate.GENERATORS)))
@click.option("--out", type=click.Path(), required=True)
@click.option("--seed", type=int, default=0)
@click.option("--param", "params", multiple=True,
              help="Generator parameter as name=value (repeatable).")
def generate_cmd(kind, out, seed, params):
    """Generate a synthetic graph and write it as TSV."""
    kwargs = {}
    for p in params:
        key, _, value = p.partition("=")
        try:
            kwargs[key] = json.loads(value)
        except json.JSONDecodeError:
            kwargs[key] = value
    try:
        vertices, edges = generate.generate(kind, seed=seed, **kwargs)
        _, g = storage.build_graph(vertices, edges)
        storage.save_tsv(g, out)
    except (ColgraphError, ValueError) as exc:
        _fail(exc)
    click.echo(f"wrote {len(edges)} edges ({len(vertices)} vertices) to {out}")


@main.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--by", type=click.Choice(["type", "edge"]), required=True)
@click.option("--out", type=click.Path(), required=True)
def cluster(path, by, out):
    """Physically recluster a TSV edge file (type, or type then edge)."""
    try:
        _, g = _load(path)
        g = _cluster(g, by)
        storage.save_tsv(g, out)
    except ColgraphError as exc:
        _fail(exc)
    click.echo(f"wrote {by}-clustered graph to {out}")


@main.command()
@click.option("--graph", "graph_path", type=click.Path(exists=True),
              required=True)
@click.option("--cluster", "cluster_mode",
              type=click.Choice(["none", "type", "edge"]), default="none")
@click.option("--start", required=True,
              help="Comma-separated start vertex ids.")
@click.option("--predicate", "predicate_text", default="*")
@click.option("--collect", type=int, default=0)
@click.option("--recurse", default="1", help="Hop bound, or 'inf'.")
@click.option("--direction", type=click.Choice(["fwd", "bwd"]), default="fwd")
@click.option("--operator", type=click.Choice(["auto", "ls", "fi", "oracle"]),
              default="auto")
@click.option("--xi", type=int, default=64, help="FI fragment size.")
@click.option("--fpr", type=float, default=0.01,
              help="Synopsis false-positive rate.")
@click.option("--partitions", type=int, default=1, help="LS scan partitions.")
def query(graph_path, cluster_mode, start, predicate_text, collect, recurse,
          direction, operator, xi, fpr, partitions):
    """Run a single traversal query and print the result set and report."""
    r = math.inf if recurse == "inf" else int(recurse)
    try:
        vgroup, g = _load(graph_path)
        g = _cluster(g, cluster_mode)
        cfg = engine.TraversalConfig(
            start_vertices=set(start.split(",")),
            predicate=parse(predicate_text),
            collection_boundary=collect,
            recursion_boundary=r,
            direction="backward" if direction == "bwd" else "forward",
        )
        stats = storage.compute_stats(g, vgroup)
        cp = engine.CostParams(false_positive_rate=fpr, fragment_size=xi)
        part = ls.ScanPartitioning.equal(partitions, g.edge_count)
        result, report = engine.traverse(
            cfg, g, stats=stats, cost_params=cp,
            operator_override=None if operator == "auto" else operator,
            partitioning=part)
    except ColgraphError as exc:
        _fail(exc)
    click.echo(json.dumps(sorted(result)))
    click.echo(report.to_json())


@main.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True),
              required=True, help="Benchmark spec JSON.")
@click.option("--out", "outdir", type=click.Path(), default="bench-out")
@click.option("--plots/--no-plots", "render_plots", default=True)
def bench(spec_path, outdir, render_plots):
    """Run a benchmark sweep; writes CSV, JSON and figures."""
    outdir = pathlib.Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        spec = bench_mod.BenchmarkSpec.from_json(spec_path)
        report = bench_mod.run(spec)
    except (ColgraphError, ValueError, KeyError) as exc:
        _fail(exc)
    csv_path = outdir / "results.csv"
    json_path = outdir / "results.json"
    report.to_csv(csv_path)
    report.to_json(json_path)
    click.echo(f"wrote {csv_path} and {json_path}")
    if render_plots:
        for path in plots.render_report(report, outdir):
            click.echo(f"wrote {path}")
    for sweep in report.sweeps:
        click.echo(f"sweep operator={sweep['operator']} xi={sweep['xi']} "
                   f"fpr={sweep['fpr']} R2={sweep['r2']:.3f}")


@main.command("tgi-report")
@click.option("--graph", "graph_path", type=click.Path(exists=True),
              required=True)
@click.option("--cluster", "cluster_mode",
              type=click.Choice(["none", "type", "edge"]), default="edge")
@click.option("--xi", type=int, default=64, help="Fixed fragment size.")
@click.option("--min-xi", type=int, default=None,
              help="Use the degree-adaptive policy with this minimum size.")
@click.option("--fpr", type=float, default=0.01)
def tgi_report(graph_path, cluster_mode, xi, min_xi, fpr):
    """Build a transition graph index and print its memory report."""
    try:
        _, g = _load(graph_path)
        g = _cluster(g, cluster_mode)
        policy = ("adaptive", min_xi) if min_xi is not None else ("fixed", xi)
        tgi = fi.build_tgi(g, policy, fpr)
    except (ColgraphError, ValueError) as exc:
        _fail(exc)
    click.echo(json.dumps(tgi.report(), indent=2))


if __name__ == "__main__":
    main()

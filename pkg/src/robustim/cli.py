"""Command line interface.

Every option can also be set through an environment variable named
``ROBUSTIM_<COMMAND>_<OPTION>``, e.g. ``ROBUSTIM_WIDTH_SWEEP_NUM_SIMS=2000``.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .generators import (gen_star_forest, gen_two_cluster_er, gen_weighted_cascade_graph, load_edge_multiset,
                         weighted_cascade_probs)
from .graph import GraphFormatError, ParameterSpace, SeedSet, load_graph, load_space, save_graph, save_space
from .harness import (SAMPLERS, ExperimentConfig, Stopwatch, metadata, resolve_graph, sampler_compare,
                      width_sweep, write_metadata, write_sampler_outputs, write_sweep_csv)
from .maximize import greedy as run_greedy
from .robust import DEFAULT_CASCADES, certify as run_certify
from .spread import DEFAULT_NUM_SIMS, ExactEvaluator, MonteCarloEvaluator


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _common(f):
    opts = [
        click.option("--seed", type=int, default=0, show_default=True, help="Master RNG seed."),
        click.option("--num-sims", type=int, default=DEFAULT_NUM_SIMS, show_default=True,
                     help="Monte Carlo simulations per spread estimate."),
        click.option("--workers", type=int, default=1, show_default=True,
                     help="Simulation partitions (results do not depend on it)."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _source(f):
    f = click.option("--fixture", help="Generator spec, e.g. 'wc:n=500,links=3' or 'star-forest:k_pairs=10,t=20'.")(f)
    f = click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False),
                     help="Edge list with ground-truth probabilities.")(f)
    return f


def _evaluator(exact: bool, num_sims: int, seed: int, workers: int):
    return ExactEvaluator() if exact else MonteCarloEvaluator(num_sims, seed, workers)


@click.group(context_settings={"auto_envvar_prefix": "ROBUSTIM", "show_default": True})
@click.version_option(package_name="artifact")
def main():
    """Robust influence maximization: LUGreedy certificates and sampling experiments."""


@main.command()
@click.argument("kind", type=click.Choice(["star-forest", "two-cluster", "wc"]))
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", help="Where graph.tsv/space.tsv go.")
@click.option("--k-pairs", type=int, default=2)
@click.option("--leaves", type=int, default=3, help="Leaves per star.")
@click.option("--lower", type=float, default=0.2)
@click.option("--upper", type=float, default=0.8)
@click.option("--half-size", type=int, default=10)
@click.option("--p-center", type=float, default=None)
@click.option("--eps", type=float, default=0.05)
@click.option("--n", "n_nodes", type=int, default=500)
@click.option("--links", type=int, default=3)
@click.option("--raw", type=click.Path(exists=True, dir_okay=False),
              help="wc only: existing edge multiset (duplicates allowed) instead of a synthetic one.")
@click.option("--width", type=float, default=0.0, help="wc only: interval width of space.tsv around p.")
@click.option("--seed", type=int, default=0)
def gen(kind, out_dir, k_pairs, leaves, lower, upper, half_size, p_center, eps, n_nodes, links, raw, width, seed):
    """Write a fixture graph (graph.tsv, with probabilities) and its parameter space (space.tsv)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if kind == "star-forest":
        graph, space = gen_star_forest(k_pairs, leaves, lower, upper)
        theta = space.midpoint()
    elif kind == "two-cluster":
        p = p_center if p_center is not None else 2.0 / half_size
        graph, space = gen_two_cluster_er(half_size, p, eps, seed)
        theta = space.midpoint()
    else:
        if raw:
            graph, theta = weighted_cascade_probs(load_edge_multiset(raw))
        else:
            graph, theta = gen_weighted_cascade_graph(n_nodes, links, seed)
        space = ParameterSpace.around(theta, width / 2.0)
    save_graph(out / "graph.tsv", graph, theta)
    save_space(out / "space.tsv", space)
    click.echo(json.dumps({"n": graph.n, "m": graph.m, "graph": str(out / "graph.tsv"),
                           "space": str(out / "space.tsv")}))


@main.command()
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--seeds", required=True, help="Seed nodes, comma or semicolon separated.")
@click.option("--exact", is_flag=True, help="Enumerate live-edge graphs instead of simulating.")
@_common
def spread(graph_path, seeds, exact, seed, num_sims, workers):
    """Influence spread of a seed set under the graph's probabilities."""
    graph, theta = _load_with_probs(graph_path)
    s = SeedSet.parse(seeds, n=graph.n)
    est = _evaluator(exact, num_sims, seed, workers).estimate(graph, theta, s)
    click.echo(json.dumps({"seed_set": list(s), "mean": est.mean, "num_sims": est.num_sims,
                           "std_error": est.std_error, "exact": exact}))


@main.command()
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--k", type=int, default=5)
@click.option("--exact", is_flag=True)
@_common
def greedy(graph_path, k, exact, seed, num_sims, workers):
    """Greedy seed set under the graph's probabilities."""
    graph, theta = _load_with_probs(graph_path)
    ev = _evaluator(exact, num_sims, seed, workers)
    s = run_greedy(graph, k, theta, ev)
    est = ev.fresh(1).estimate(graph, theta, s)
    click.echo(json.dumps({"seed_set": list(s), "spread": est.mean, "std_error": est.std_error}))


@main.command()
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--space", "space_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Parameter space file: 'eid l r' per line.")
@click.option("--k", type=int, default=5)
@click.option("--exact", is_flag=True)
@click.option("--cascades", type=int, default=DEFAULT_CASCADES, help="Cascades per heuristic for alpha_bar.")
@click.option("--conservative", is_flag=True, help="Report alpha minus two standard errors.")
@click.option("--min-bound", type=float, default=None, help="Exit with status 3 if the lower bound is below this.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Certificate file (default: stdout).")
@_common
def certify(graph_path, space_path, k, exact, cascades, conservative, min_bound, out_path, seed, num_sims, workers):
    """LUGreedy seed set with its gap-ratio certificate as JSON."""
    try:
        graph, _ = load_graph(graph_path)
        space = load_space(space_path, graph.m)
    except (GraphFormatError, ValueError) as exc:
        raise click.ClickException(str(exc)) from None
    cert = run_certify(graph, space, k, _evaluator(exact, num_sims, seed, workers), cascades, seed, conservative)
    text = cert.to_json()
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)
    if min_bound is not None and cert.lower_bound < min_bound:
        click.echo(f"lower bound {cert.lower_bound:.6f} is below --min-bound {min_bound}", err=True)
        sys.exit(3)


@main.command("width-sweep")
@_source
@click.option("--k", type=int, default=5)
@click.option("--widths", default="0,0.05,0.1,0.2,0.3", help="Comma-separated interval widths W.")
@click.option("--cascades", type=int, default=DEFAULT_CASCADES, help="Cascades per heuristic for alpha_bar.")
@click.option("--out-dir", type=click.Path(file_okay=False), default="results")
@_common
def width_sweep_cmd(graph_path, fixture, k, widths, cascades, out_dir, seed, num_sims, workers):
    """alpha and alpha_bar for intervals of growing width around the ground truth (width_sweep.csv)."""
    config = ExperimentConfig(graph=graph_path, fixture=fixture, k=k, widths=_floats(widths),
                              alpha_bar_cascades=cascades, num_sims=num_sims, seed=seed, workers=workers,
                              out_dir=out_dir)
    graph, theta = _resolve(config)
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    with Stopwatch() as sw:
        rows = width_sweep(graph, theta, config)
    write_sweep_csv(Path(out_dir) / "width_sweep.csv", rows)
    write_metadata(out_dir, metadata("width-sweep", config, graph, wall_seconds=sw.seconds))
    click.echo(str(Path(out_dir) / "width_sweep.csv"))


@main.command("sampler-compare")
@_source
@click.option("--k", type=int, default=5)
@click.option("--roster", default=",".join(SAMPLERS), help="Subset of US,ICS,OES.")
@click.option("--kappa", type=float, default=0.8)
@click.option("--gamma", type=float, default=None, help="Confidence parameter (default m^-0.5).")
@click.option("--us-batch", type=int, default=100, help="US: samples per edge per round.")
@click.option("--ics-cascades", type=int, default=200, help="ICS: cascades per round.")
@click.option("--oes-per-edge", type=int, default=200, help="OES: samples per out-edge per round.")
@click.option("--initial-samples", type=int, default=318, help="Uniform samples per edge before round 0.")
@click.option("--max-iters", type=int, default=100)
@click.option("--runs", type=int, default=1, help="Independent seeded repetitions.")
@click.option("--alpha-bar/--no-alpha-bar", "trace_alpha_bar", default=False, help="Compute alpha_bar every round.")
@click.option("--cascades", type=int, default=DEFAULT_CASCADES, help="Cascades per heuristic for alpha_bar.")
@click.option("--timing/--no-timing", default=False, help="Fill wall_seconds (makes output non-reproducible).")
@click.option("--out-dir", type=click.Path(file_okay=False), default="results")
@_common
def sampler_compare_cmd(graph_path, fixture, k, roster, kappa, gamma, us_batch, ics_cascades, oes_per_edge,
                        initial_samples, max_iters, runs, trace_alpha_bar, cascades, timing, out_dir,
                        seed, num_sims, workers):
    """Run the samplers from shared initial samples and write per-sampler traces."""
    names = tuple(s.strip().upper() for s in roster.split(",") if s.strip())
    bad = [s for s in names if s not in SAMPLERS]
    if bad:
        raise click.BadParameter(f"unknown sampler(s) {bad}", param_hint="--roster")
    config = ExperimentConfig(graph=graph_path, fixture=fixture, k=k, roster=names, kappa=kappa, gamma=gamma,
                              us_batch=us_batch, ics_cascades=ics_cascades, oes_per_edge=oes_per_edge,
                              initial_samples=initial_samples, max_iters=max_iters, runs=runs,
                              num_sims=num_sims, alpha_bar_cascades=cascades, trace_alpha_bar=trace_alpha_bar,
                              seed=seed, workers=workers, timing=timing, out_dir=out_dir)
    graph, theta = _resolve(config)
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    with Stopwatch() as sw:
        results = sampler_compare(graph, theta, config)
    paths = write_sampler_outputs(out_dir, results, config)
    write_metadata(out_dir, metadata("sampler-compare", config, graph, wall_seconds=sw.seconds))
    for p in paths:
        click.echo(str(p))


def _resolve(config):
    try:
        return resolve_graph(config)
    except (GraphFormatError, ValueError) as exc:
        raise click.ClickException(str(exc)) from None


def _load_with_probs(path):
    try:
        graph, theta = load_graph(path)
    except GraphFormatError as exc:
        raise click.ClickException(str(exc)) from None
    if theta is None:
        raise click.ClickException(f"{path}: probabilities (third column) required")
    return graph, theta


if __name__ == "__main__":
    main()

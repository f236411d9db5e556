"""Experiment orchestration: graph sources, the width sweep and the sampler comparison."""
from __future__ import annotations

import csv
import json
import platform
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .generators import gen_star_forest, gen_two_cluster_er, gen_weighted_cascade_graph, width_space
from .graph import DirectedGraph, load_graph
from .robust import GREEDY_FACTOR, alpha_bar, gap_ratio_estimate, lugreedy_detail
from .sampling import (GroundTruthEnv, ObservationSet, SamplerResult, ics_rim, oes_rim, sample_uniform,
                       us_rim_iterative, write_trace_csv)
from .spread import MonteCarloEvaluator, derive_seed

SWEEP_COLUMNS = ("W", "alpha", "alpha_bar", "alpha_std_error", "lower_bound", "seed_set")
SUMMARY_COLUMNS = ("sampler", "run", "iterations", "avg_samples_per_edge", "alpha", "stop_reason", "seed_set")
DEFAULT_WIDTHS = (0.0, 0.05, 0.1, 0.2, 0.3)
SAMPLERS = ("US", "ICS", "OES")

CONVENTIONS = {
    "width_interval": "l = max(p - W/2, 0), r = min(p + W/2, 1) (clamped; printed min/max read as swapped)",
    "confidence_interval": "combined Chernoff interval clamped into [0, 1]; untried edges get [0, 1]",
    "uniform_multiplicative": "intervals [p_hat/(1+a), p_hat/(1-a)], a = L/(2n+L), L = ln(1/(1-eps))",
    "alpha_bar_simulation_theta": "interval midpoint",
    "alpha_bar_competitor_tie": "upper end",
    "alpha_bar_incidence": "edge tried in >= 10% of cascades (per-cascade incidence)",
    "oes_stop": "alpha gain < 0.005 in each of the last 3 rounds",
    "gamma_reuse": "same gamma for every round's intervals",
}


@dataclass
class ExperimentConfig:
    graph: str | None = None
    fixture: str | None = None
    k: int = 5
    widths: tuple[float, ...] = DEFAULT_WIDTHS
    roster: tuple[str, ...] = SAMPLERS
    kappa: float = 0.8
    gamma: float | None = None
    us_batch: int = 100
    ics_cascades: int = 200
    oes_per_edge: int = 200
    initial_samples: int = 318
    max_iters: int = 100
    runs: int = 1
    num_sims: int = 10_000
    alpha_bar_cascades: int = 200
    trace_alpha_bar: bool = False
    seed: int = 0
    workers: int = 1
    timing: bool = False
    out_dir: str = "results"

    def resolved_gamma(self, m: int) -> float:
        return self.gamma if self.gamma is not None else m ** -0.5


def parse_fixture(spec: str) -> tuple[str, dict]:
    """``"name:key=val,key=val"`` -> (name, params)."""
    name, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, _, val = item.partition("=")
        if not _:
            raise ValueError(f"fixture parameter {item!r} is not key=value")
        params[key.strip()] = float(val) if any(c in val for c in ".eE") else int(val)
    return name.strip(), params


def build_fixture(spec: str) -> tuple[DirectedGraph, np.ndarray]:
    """Graph and ground-truth parameters for a named generator.

    star-forest: first half of the stars at ``lower``, second half at ``upper``
    (the adversarial assignment of the tight example). wc: weighted-cascade
    probabilities on a synthetic collaboration multigraph. two-cluster: every
    edge at ``p_center``.
    """
    name, kw = parse_fixture(spec)
    if name == "star-forest":
        k_pairs, t = int(kw.get("k_pairs", 10)), int(kw.get("t", 20))
        lo, hi = float(kw.get("lower", 0.2)), float(kw.get("upper", 0.8))
        graph, _ = gen_star_forest(k_pairs, t, lo, hi)
        return graph, np.where(np.arange(graph.m) < k_pairs * t, lo, hi)
    if name == "wc":
        return gen_weighted_cascade_graph(int(kw.get("n", 500)), int(kw.get("links", 3)), int(kw.get("seed", 0)))
    if name == "two-cluster":
        half = int(kw.get("half_size", 10))
        p = float(kw.get("p_center", 2.0 / half))
        graph, space = gen_two_cluster_er(half, p, 0.0, int(kw.get("seed", 0)))
        return graph, space.midpoint()
    raise ValueError(f"unknown fixture {name!r}; expected star-forest, wc or two-cluster")


def resolve_graph(config: ExperimentConfig) -> tuple[DirectedGraph, np.ndarray]:
    if (config.graph is None) == (config.fixture is None):
        raise ValueError("give exactly one of graph (file) or fixture")
    if config.fixture is not None:
        return build_fixture(config.fixture)
    graph, theta = load_graph(config.graph)
    if theta is None:
        raise ValueError(f"{config.graph}: ground-truth probabilities (third column) required")
    return graph, theta


def make_evaluator(config: ExperimentConfig, *tags) -> MonteCarloEvaluator:
    return MonteCarloEvaluator(config.num_sims, derive_seed(config.seed, *tags), config.workers)


# ---------------------------------------------------------------------------
# width sweep

def width_sweep(graph, theta, config: ExperimentConfig) -> list[dict]:
    rows = []
    for i, w in enumerate(config.widths):
        ev = make_evaluator(config, 10, i)
        space = width_space(theta, w)
        lu = lugreedy_detail(graph, config.k, space, ev)
        gap = gap_ratio_estimate(graph, config.k, space, lu.seeds, lu.plus_greedy, ev)
        bar = alpha_bar(graph, config.k, space, lu.seeds, config.alpha_bar_cascades,
                        derive_seed(config.seed, 11, i), ev)
        rows.append({"W": w, "alpha": gap.alpha, "alpha_bar": bar, "alpha_std_error": gap.std_error,
                     "lower_bound": gap.alpha * GREEDY_FACTOR, "seed_set": str(lu.seeds)})
    return rows


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([f"{r['W']:g}", f"{r['alpha']:.10f}", f"{r['alpha_bar']:.10f}",
                        f"{r['alpha_std_error']:.10f}", f"{r['lower_bound']:.10f}", r["seed_set"]])


# ---------------------------------------------------------------------------
# sampler comparison

def run_sampler(name: str, graph, theta, config: ExperimentConfig, run: int = 0) -> SamplerResult:
    """One sampler on a fresh environment; every sampler of a run shares env seed and initial samples."""
    env = GroundTruthEnv(theta, seed=derive_seed(config.seed, 20, run))
    obs0 = ObservationSet.empty(graph.m)
    if config.initial_samples:
        sample_uniform(env, obs0, config.initial_samples)
    ev = make_evaluator(config, 21, run)
    gamma = config.resolved_gamma(graph.m)
    bar = config.alpha_bar_cascades if config.trace_alpha_bar else None
    common = dict(evaluator=ev, alpha_bar_cascades=bar, seed=derive_seed(config.seed, 22, run))
    if name == "US":
        return us_rim_iterative(env, graph, config.k, config.us_batch, config.kappa, gamma,
                                config.max_iters, obs0, **common)
    if name == "ICS":
        return ics_rim(env, graph, config.k, obs0, config.kappa, gamma, config.ics_cascades,
                       config.max_iters, **common)
    if name == "OES":
        return oes_rim(env, graph, config.k, obs0, gamma, config.oes_per_edge, config.max_iters, **common)
    raise ValueError(f"unknown sampler {name!r}; expected one of {SAMPLERS}")


def sampler_compare(graph, theta, config: ExperimentConfig) -> dict[tuple[str, int], SamplerResult]:
    return {(name, run): run_sampler(name, graph, theta, config, run)
            for run in range(config.runs) for name in config.roster}


def write_summary_csv(path, results: dict[tuple[str, int], SamplerResult]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for (name, run), res in results.items():
            last = res.trace[-1]
            w.writerow([name, run, len(res.trace), f"{last.avg_samples_per_edge:.6f}",
                        f"{last.alpha:.10f}", res.stop_reason, str(last.seed_set)])


def trace_filename(name: str, run: int, runs: int) -> str:
    return f"trace_{name}.csv" if runs == 1 else f"trace_{name}_run{run}.csv"


def write_sampler_outputs(out_dir, results, config: ExperimentConfig) -> list[Path]:
    out = Path(out_dir)
    paths = []
    for (name, run), res in results.items():
        p = out / trace_filename(name, run, config.runs)
        write_trace_csv(p, res.trace, timing=config.timing)
        paths.append(p)
    write_summary_csv(out / "summary.csv", results)
    return paths + [out / "summary.csv"]


# ---------------------------------------------------------------------------
# run metadata

def metadata(command: str, config: ExperimentConfig, graph: DirectedGraph, **extra) -> dict:
    cfg = asdict(config)
    cfg["gamma_resolved"] = config.resolved_gamma(graph.m)
    return {
        "command": command,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": cfg,
        "graph": {"n": graph.n, "m": graph.m},
        "conventions": CONVENTIONS,
        "rng": "counter-hashed live-edge draws keyed by (seed, simulation, edge); "
               "results independent of worker count",
        **extra,
    }


def write_metadata(out_dir, meta: dict) -> Path:
    path = Path(out_dir) / "meta.json"
    path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n", encoding="utf-8")
    return path


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(type(obj).__name__)


class Stopwatch:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


"""Shrinking parameter uncertainty by sampling edges of a hidden ground truth.

Edges are observed only through Bernoulli draws from a :class:`GroundTruthEnv`.
Observations are kept as per-edge sufficient statistics (trials, successes)
and turned into a parameter space with combined additive/multiplicative
Chernoff intervals. Three samplers refine the space until the gap ratio of the
LUGreedy solution is high enough:

* uniform: every edge gets the same number of samples per round;
* cascade: run cascades from the current LUGreedy set and observe every edge
  whose source activates;
* out-edge: sample only the out-edges of the current LUGreedy set.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .graph import DirectedGraph, ParameterSpace, SeedSet, as_probabilities
from .robust import alpha_bar, gap_ratio_estimate, lugreedy_detail
from .spread import ExactEvaluator

TRACE_COLUMNS = ("iter", "avg_samples_per_edge", "alpha", "alpha_bar", "seed_set", "wall_seconds")
OES_MIN_GAIN = 0.005
OES_PATIENCE = 3


class ObservationSet:
    """Per-edge Bernoulli tallies: ``trials[e]`` draws with ``successes[e]`` ones."""

    def __init__(self, trials, successes=None):
        self.trials = np.array(trials, dtype=np.int64)
        self.successes = np.zeros_like(self.trials) if successes is None else np.array(successes, dtype=np.int64)
        if self.trials.shape != self.successes.shape:
            raise ValueError("trials and successes must have the same shape")
        if np.any(self.successes < 0) or np.any(self.successes > self.trials):
            raise ValueError("need 0 <= successes <= trials for every edge")

    @classmethod
    def empty(cls, m: int) -> "ObservationSet":
        return cls(np.zeros(m, dtype=np.int64))

    @property
    def m(self) -> int:
        return len(self.trials)

    def p_hat(self) -> np.ndarray:
        """Empirical means; NaN where an edge has no trials."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.trials > 0, self.successes / np.maximum(self.trials, 1), np.nan)

    def avg_samples_per_edge(self) -> float:
        return float(self.trials.sum()) / self.m if self.m else 0.0

    def record(self, edges, outcomes) -> None:
        """Add one trial per listed edge (edges may repeat)."""
        edges = np.asarray(edges, dtype=np.int64)
        np.add.at(self.trials, edges, 1)
        np.add.at(self.successes, edges, np.asarray(outcomes, dtype=np.int64))

    def record_counts(self, edges, trials, successes) -> None:
        edges = np.asarray(edges, dtype=np.int64)
        np.add.at(self.trials, edges, np.asarray(trials, dtype=np.int64))
        np.add.at(self.successes, edges, np.asarray(successes, dtype=np.int64))

    def copy(self) -> "ObservationSet":
        return ObservationSet(self.trials.copy(), self.successes.copy())

    def __add__(self, other: "ObservationSet") -> "ObservationSet":
        if self.m != other.m:
            raise ValueError("observation sets cover different edge counts")
        return ObservationSet(self.trials + other.trials, self.successes + other.successes)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ObservationSet) and np.array_equal(self.trials, other.trials)
                and np.array_equal(self.successes, other.successes))

    def __repr__(self) -> str:
        return f"ObservationSet(m={self.m}, total_trials={int(self.trials.sum())})"


class GroundTruthEnv:
    """Hidden edge probabilities reachable only through Bernoulli draws."""

    def __init__(self, theta, seed: int = 0):
        self._theta = as_probabilities(theta)
        self._rng = np.random.default_rng(seed)
        self.draws = np.zeros(len(self._theta), dtype=np.int64)

    @property
    def m(self) -> int:
        return len(self._theta)

    def draw(self, e: int) -> bool:
        self.draws[e] += 1
        return bool(self._rng.random() < self._theta[e])

    def draw_edges(self, edges) -> np.ndarray:
        """One Bernoulli outcome per listed edge."""
        edges = np.asarray(edges, dtype=np.int64)
        np.add.at(self.draws, edges, 1)
        return self._rng.random(len(edges)) < self._theta[edges]

    def draw_counts(self, edges, times: int) -> np.ndarray:
        """Success counts of ``times`` draws on each listed edge."""
        edges = np.asarray(edges, dtype=np.int64)
        np.add.at(self.draws, edges, times)
        return self._rng.binomial(times, self._theta[edges])

    def reveal(self) -> np.ndarray:
        """Ground truth, for evaluation code only; samplers never call this."""
        return self._theta


def sample_uniform(env: GroundTruthEnv, obs: ObservationSet, times: int) -> ObservationSet:
    edges = np.arange(obs.m)
    obs.record_counts(edges, np.full(obs.m, times), env.draw_counts(edges, times))
    return obs


def confidence_intervals(obs: ObservationSet, gamma: float) -> ParameterSpace:
    """Simultaneous intervals holding for all edges with probability >= 1 - gamma.

    With ``c = sqrt(3 ln(2m/gamma) / t)`` each edge gets
    ``p_hat + c^2/2 -/+ c * sqrt(c^2/4 + p_hat)`` clamped into [0, 1]; edges
    without trials get [0, 1].
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    m = obs.m
    t = obs.trials.astype(np.float64)
    seen = t > 0
    p = np.where(seen, obs.successes / np.maximum(t, 1.0), 0.0)
    c2 = np.where(seen, 3.0 * math.log(2.0 * m / gamma) / np.maximum(t, 1.0), 0.0)
    centre = p + c2 / 2.0
    spread = np.sqrt(c2) * np.sqrt(c2 / 4.0 + p)
    lo = np.where(seen, np.clip(centre - spread, 0.0, 1.0), 0.0)
    hi = np.where(seen, np.clip(centre + spread, 0.0, 1.0), 1.0)
    return ParameterSpace(lo, np.maximum(hi, lo))


# ---------------------------------------------------------------------------
# uniform sampling with precomputed sample counts

@dataclass(frozen=True)
class SamplingPlan:
    setting: str
    epsilon: float
    gamma: float
    t: int
    p_min: float | None = None
    half_width: float | None = None      # additive setting
    relative_slack: float | None = None  # multiplicative setting: a

    def __post_init__(self):
        if self.setting not in ("additive", "multiplicative"):
            raise ValueError("setting must be 'additive' or 'multiplicative'")
        if not 0.0 < self.epsilon < 1.0 or not 0.0 < self.gamma < 1.0:
            raise ValueError("epsilon and gamma must lie in (0, 1)")
        if self.setting == "multiplicative" and not (self.p_min is not None and 0.0 < self.p_min <= 1.0):
            raise ValueError("multiplicative setting needs 0 < p_min <= 1")


def plan_uniform(graph: DirectedGraph, k: int, epsilon: float, gamma: float,
                 setting: str = "additive", p_min: float | None = None) -> SamplingPlan:
    """Per-edge sample count guaranteeing robust ratio >= (1-1/e)(1-epsilon) w.p. >= 1-gamma.

    additive:        t = 2 m^2 n^2 ln(2m/gamma) / (k^2 eps^2),   half-width k eps / (m n)
    multiplicative:  t = 3 ln(2m/gamma) / p_min * (2n / ln(1/(1-eps)) + 1)^2,
                     intervals [p_hat/(1+a), p_hat/(1-a)] with a = L / (2n + L), L = ln(1/(1-eps))
    """
    n, m = graph.n, graph.m
    if setting == "multiplicative" and p_min is None:
        raise ValueError("multiplicative setting requires p_min")
    if k < 1:
        raise ValueError("k must be >= 1")
    log_term = math.log(2.0 * m / gamma)
    if setting == "additive":
        t = 2.0 * m * m * n * n * log_term / (k * k * epsilon * epsilon)
        return SamplingPlan(setting, epsilon, gamma, math.ceil(t), half_width=k * epsilon / (m * n))
    big_l = math.log(1.0 / (1.0 - epsilon))
    t = 3.0 * log_term / p_min * (2.0 * n / big_l + 1.0) ** 2
    return SamplingPlan(setting, epsilon, gamma, math.ceil(t), p_min=p_min,
                        relative_slack=big_l / (2.0 * n + big_l))


def plan_space(obs: ObservationSet, plan: SamplingPlan) -> ParameterSpace:
    p = np.nan_to_num(obs.p_hat(), nan=0.0)
    if plan.setting == "additive":
        return ParameterSpace.around(p, plan.half_width)
    a = plan.relative_slack
    return ParameterSpace(np.clip(p / (1.0 + a), 0.0, 1.0), np.clip(p / (1.0 - a), 0.0, 1.0))


def us_rim_oneshot(env: GroundTruthEnv, graph: DirectedGraph, k: int, plan: SamplingPlan, evaluator=None):
    """Sample every edge ``plan.t`` times, build the interval space and run LUGreedy."""
    obs = sample_uniform(env, ObservationSet.empty(graph.m), plan.t)
    space = plan_space(obs, plan)
    return space, lugreedy_detail(graph, k, space, evaluator).seeds


# ---------------------------------------------------------------------------
# iterative samplers

@dataclass
class TraceRow:
    iter: int
    avg_samples_per_edge: float
    alpha: float
    alpha_bar: float
    seed_set: SeedSet
    wall_seconds: float


@dataclass
class SamplerResult:
    space: ParameterSpace
    seeds: SeedSet
    alpha: float
    trace: list[TraceRow]
    truncated: bool
    observations: ObservationSet = field(repr=False)
    stop_reason: str = ""


def cascade_with_observation(env: GroundTruthEnv, graph: DirectedGraph, obs: ObservationSet, seeds) -> ObservationSet:
    """One cascade from ``seeds`` under the hidden parameters.

    Every out-edge of every activated node is drawn once and recorded.
    """
    seeds = list(SeedSet(seeds, n=graph.n))
    if not seeds:
        raise ValueError("cascade needs a non-empty seed set")
    active = np.zeros(graph.n, dtype=bool)
    active[seeds] = True
    frontier = seeds
    while frontier:
        nxt = []
        for u in frontier:
            out = graph.out_edges(u)
            if len(out) == 0:
                continue
            hit = env.draw_edges(out)
            obs.record(out, hit)
            for v in graph.dst[out[hit]].tolist():
                if not active[v]:
                    active[v] = True
                    nxt.append(v)
        frontier = nxt
    return obs


def _run(env, graph, k, obs, gamma, evaluator, max_iters, sample_step, should_stop,
         alpha_bar_cascades, seed) -> SamplerResult:
    evaluator = evaluator if evaluator is not None else ExactEvaluator()
    start = time.perf_counter()
    trace: list[TraceRow] = []
    best = None
    for i in range(max_iters + 1):
        space = confidence_intervals(obs, gamma)
        lu = lugreedy_detail(graph, k, space, evaluator)
        alpha = gap_ratio_estimate(graph, k, space, lu.seeds, lu.plus_greedy, evaluator).alpha
        bar = (alpha_bar(graph, k, space, lu.seeds, alpha_bar_cascades, seed + i, evaluator)
               if alpha_bar_cascades else math.nan)
        trace.append(TraceRow(i, obs.avg_samples_per_edge(), alpha, bar, lu.seeds,
                              time.perf_counter() - start))
        if best is None or alpha > best[2]:
            best = (space, lu.seeds, alpha)
        reason = should_stop(trace)
        if reason:
            return SamplerResult(space, lu.seeds, alpha, trace, False, obs, reason)
        if i < max_iters:
            sample_step(lu.seeds)
    space, seeds, alpha = best
    return SamplerResult(space, seeds, alpha, trace, True, obs, "max_iters")


def _prepare(graph, obs0):
    return ObservationSet.empty(graph.m) if obs0 is None else obs0.copy()


def us_rim_iterative(env, graph, k, batch: int, kappa: float, gamma: float, max_iters: int = 100,
                     obs0: ObservationSet | None = None, evaluator=None,
                     alpha_bar_cascades: int | None = None, seed: int = 0) -> SamplerResult:
    """Uniform rounds of ``batch`` samples per edge until alpha >= kappa."""
    _check(kappa, batch)
    obs = _prepare(graph, obs0)
    return _run(env, graph, k, obs, gamma, evaluator, max_iters,
                lambda s: sample_uniform(env, obs, batch),
                lambda tr: "kappa" if tr[-1].alpha >= kappa else "",
                alpha_bar_cascades, seed)


def ics_rim(env, graph, k, obs0: ObservationSet | None, kappa: float, gamma: float, cascades: int,
            max_iters: int = 100, evaluator=None, alpha_bar_cascades: int | None = None,
            seed: int = 0) -> SamplerResult:
    """Rounds of ``cascades`` observed cascades from the current LUGreedy set until alpha > kappa."""
    _check(kappa, cascades)
    obs = _prepare(graph, obs0)

    def step(seeds):
        for _ in range(cascades):
            cascade_with_observation(env, graph, obs, seeds)

    return _run(env, graph, k, obs, gamma, evaluator, max_iters, step,
                lambda tr: "kappa" if tr[-1].alpha > kappa else "",
                alpha_bar_cascades, seed)


def oes_rim(env, graph, k, obs0: ObservationSet | None, gamma: float, per_edge: int,
            max_iters: int = 100, evaluator=None, alpha_bar_cascades: int | None = None,
            seed: int = 0, min_gain: float = OES_MIN_GAIN, patience: int = OES_PATIENCE,
            kappa: float | None = None) -> SamplerResult:
    """Rounds of ``per_edge`` draws on each out-edge of the current LUGreedy set.

    Stops once alpha has improved by less than ``min_gain`` in each of the last
    ``patience`` rounds (or exceeds ``kappa`` when one is given).
    """
    if per_edge < 1:
        raise ValueError("per_edge must be >= 1")
    obs = _prepare(graph, obs0)

    def step(seeds):
        out = np.concatenate([graph.out_edges(u) for u in seeds]) if seeds else np.empty(0, np.int64)
        if len(out):
            obs.record_counts(out, np.full(len(out), per_edge), env.draw_counts(out, per_edge))

    def stop(tr):
        if kappa is not None and tr[-1].alpha > kappa:
            return "kappa"
        if len(tr) > patience:
            gains = [tr[-j].alpha - tr[-j - 1].alpha for j in range(1, patience + 1)]
            if max(gains) < min_gain:
                return "stable"
        return ""

    return _run(env, graph, k, obs, gamma, evaluator, max_iters, step, stop, alpha_bar_cascades, seed)


def _check(kappa, count):
    if not 0.0 < kappa < 1.0:
        raise ValueError("kappa must lie in (0, 1)")
    if count < 1:
        raise ValueError("per-round sample count must be >= 1")


def write_trace_csv(path, rows: list[TraceRow], timing: bool = True) -> None:
    """Trace CSV; with ``timing=False`` the wall_seconds column is left empty so reruns are byte-identical."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in rows:
            w.writerow([r.iter, f"{r.avg_samples_per_edge:.6f}", f"{r.alpha:.10f}",
                        "" if math.isnan(r.alpha_bar) else f"{r.alpha_bar:.10f}",
                        str(r.seed_set), f"{r.wall_seconds:.3f}" if timing else ""])

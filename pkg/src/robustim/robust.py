"""Robust influence maximization over an interval parameter space.

LUGreedy runs greedy at both corner vectors of the space and keeps the set that
does better at the lower corner. The gap ratio

    alpha = sigma_lower(S_lu) / sigma_upper(S_upper_greedy)

certifies ``g(space, S_lu) >= alpha * (1 - 1/e)``, where ``g`` is the robust
ratio: the worst case over parameters in the space of the spread of S_lu
relative to the optimal spread. ``alpha_bar`` is a heuristic upper bound on
``g`` obtained from adversarially chosen corner parameters.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np

from .graph import DirectedGraph, ParameterSpace, SeedSet
from .maximize import TIE_TOL, greedy
from .spread import ExactEvaluator, InstanceTooLarge, ReachTable, SpreadEstimate, all_k_subsets, derive_seed

GREEDY_FACTOR = 1.0 - 1.0 / math.e
ROBUST_EXACT_MAX_EDGES = 12
ROBUST_EXACT_MAX_SUBSETS = 10**4
DEFAULT_CASCADES = 200
INCIDENCE_THRESHOLD = 0.10


@dataclass(frozen=True)
class LUGreedyResult:
    seeds: SeedSet
    minus_greedy: SeedSet
    plus_greedy: SeedSet


def lugreedy_detail(graph: DirectedGraph, k: int, space: ParameterSpace, evaluator=None) -> LUGreedyResult:
    evaluator = evaluator if evaluator is not None else ExactEvaluator()
    lo, hi = space.theta_minus(), space.theta_plus()
    s_minus = greedy(graph, k, lo, evaluator)
    s_plus = s_minus if space.is_point() else greedy(graph, k, hi, evaluator)
    if s_minus == s_plus:
        return LUGreedyResult(s_plus, s_minus, s_plus)
    # both candidates scored with the same evaluator state, so equal sets tie exactly
    v_minus = evaluator(graph, lo, s_minus)
    v_plus = evaluator(graph, lo, s_plus)
    chosen = s_minus if v_minus > v_plus + TIE_TOL else s_plus
    return LUGreedyResult(chosen, s_minus, s_plus)


def lugreedy(graph: DirectedGraph, k: int, space: ParameterSpace, evaluator=None) -> SeedSet:
    return lugreedy_detail(graph, k, space, evaluator).seeds


@dataclass(frozen=True)
class GapRatio:
    alpha: float
    std_error: float
    numerator: SpreadEstimate
    denominator: SpreadEstimate

    @property
    def conservative(self) -> float:
        return self.alpha - 2.0 * self.std_error


def gap_ratio_estimate(graph, k, space, s_lu, s_plus_greedy, evaluator=None) -> GapRatio:
    """Gap ratio with a delta-method standard error.

    With a Monte Carlo evaluator the numerator and denominator use independent
    seeds derived from the evaluator's seed.
    """
    if k < 1:
        raise ValueError("gap ratio needs k >= 1")
    if len(s_lu) != k or len(s_plus_greedy) != k:
        raise ValueError("both seed sets must have size k")
    evaluator = evaluator if evaluator is not None else ExactEvaluator()
    num = evaluator.fresh(1).estimate(graph, space.theta_minus(), s_lu)
    den = evaluator.fresh(2).estimate(graph, space.theta_plus(), s_plus_greedy)
    alpha = num.mean / den.mean
    se = alpha * math.hypot(num.std_error / num.mean, den.std_error / den.mean)
    return GapRatio(alpha, se, num, den)


def gap_ratio(graph, k, space, s_lu, s_plus_greedy, evaluator=None) -> float:
    return gap_ratio_estimate(graph, k, space, s_lu, s_plus_greedy, evaluator).alpha


def corner_vectors(space: ParameterSpace) -> np.ndarray:
    """Every corner of the box, varying only edges with a non-degenerate interval."""
    free = np.flatnonzero(space.lower < space.upper)
    bits = (np.arange(1 << len(free))[:, None] >> np.arange(len(free))[None, :]) & 1
    corners = np.tile(space.lower, (len(bits), 1))
    corners[:, free] = np.where(bits == 1, space.upper[free], space.lower[free])
    return corners


def robust_ratio_exact(graph: DirectedGraph, k: int, space: ParameterSpace, seeds) -> float:
    """Exact robust ratio ``min_theta sigma_theta(S) / max_T sigma_theta(T)`` for tiny instances.

    For a fixed pair (S, T) the ratio is a monotone linear-fractional function
    of each single edge probability, so the minimum over the box sits at a
    corner; enumerating corners and all size-k T gives the exact value.
    """
    s = SeedSet(seeds, n=graph.n)
    if len(s) != k:
        raise ValueError("seed set must have size k")
    if graph.m > ROBUST_EXACT_MAX_EDGES:
        raise InstanceTooLarge(f"robust_ratio_exact needs m <= {ROBUST_EXACT_MAX_EDGES}, got {graph.m}")
    if comb(graph.n, k) > ROBUST_EXACT_MAX_SUBSETS:
        raise InstanceTooLarge(f"robust_ratio_exact needs C(n,k) <= {ROBUST_EXACT_MAX_SUBSETS}")
    if k == 0:
        return 1.0
    return ratio_over_thetas(graph, k, s, corner_vectors(space))


def ratio_over_thetas(graph: DirectedGraph, k: int, seeds, thetas) -> float:
    """``min`` over the rows of ``thetas`` of ``sigma(S) / max_T sigma(T)`` (exact)."""
    sets = all_k_subsets(graph.n, k)
    table = ReachTable(graph)
    idx = sets.index(SeedSet(seeds))
    best = np.inf
    for a in range(0, len(thetas), 512):
        vals = table.spreads(thetas[a:a + 512], sets)
        best = min(best, float(np.min(vals[:, idx] / vals.max(axis=1))))
    return best


# ---------------------------------------------------------------------------
# heuristic upper bound

def cascade_trials(graph: DirectedGraph, theta, seeds, num_cascades: int, rng) -> np.ndarray:
    """Per-edge count of cascades in which the edge was tried (its source activated).

    In one cascade an activated node tries each out-edge exactly once, so the
    count is also the number of trials.
    """
    p = np.asarray(theta, dtype=np.float64)
    counts = np.zeros(graph.m, dtype=np.int64)
    for _ in range(num_cascades):
        active = np.zeros(graph.n, dtype=bool)
        frontier = list(seeds)
        active[frontier] = True
        while frontier:
            nxt = []
            for u in frontier:
                out = graph.out_edges(u)
                if len(out) == 0:
                    continue
                counts[out] += 1
                hit = out[rng.random(len(out)) < p[out]]
                for v in graph.dst[hit].tolist():
                    if not active[v]:
                        active[v] = True
                        nxt.append(v)
            frontier = nxt
    return counts


@dataclass(frozen=True)
class AlphaBar:
    value: float
    competitor_ratio: float
    incidence_ratio: float
    competitor: SeedSet
    competitor_theta: np.ndarray = field(repr=False)
    incidence_theta: np.ndarray = field(repr=False)


def _upper_ratio(graph, k, theta, s_lu, evaluator) -> float:
    s_g = greedy(graph, k, theta, evaluator)
    return evaluator(graph, theta, s_lu) / evaluator(graph, theta, s_g)


def alpha_bar_detail(graph: DirectedGraph, k: int, space: ParameterSpace, s_lu,
                     num_cascades: int = DEFAULT_CASCADES, seed: int = 0, evaluator=None) -> AlphaBar:
    """Minimum of two adversarial-corner upper bounds on ``g(space, s_lu)``.

    Competitor heuristic: greedy on the graph without ``s_lu`` gives a rival set;
    equal numbers of cascades from both sets under the interval midpoint decide
    each edge -- lower end if ``s_lu``'s cascades tried it strictly more often,
    otherwise upper end.
    Incidence heuristic: edges tried in at least 10% of cascades from ``s_lu``
    get the lower end, all others the upper end.
    """
    s_lu = SeedSet(s_lu, n=graph.n)
    if len(s_lu) != k or k < 1:
        raise ValueError("s_lu must be a non-empty seed set of size k")
    evaluator = evaluator if evaluator is not None else ExactEvaluator()
    mid = space.midpoint()
    rng = np.random.default_rng(derive_seed(seed, 3))

    sub, node_ids, edge_ids = graph.without_nodes(s_lu)
    k_rival = min(k, sub.n)
    rival = SeedSet(node_ids[list(greedy(sub, k_rival, mid[edge_ids], evaluator))]) if k_rival else SeedSet()
    from_lu = cascade_trials(graph, mid, s_lu, num_cascades, rng)
    from_rival = cascade_trials(graph, mid, rival, num_cascades, rng)
    theta_h1 = np.where(from_lu > from_rival, space.lower, space.upper)

    incidence = cascade_trials(graph, mid, s_lu, num_cascades, rng)
    theta_h2 = np.where(incidence >= INCIDENCE_THRESHOLD * num_cascades, space.lower, space.upper)

    r1 = _upper_ratio(graph, k, theta_h1, s_lu, evaluator.fresh(4))
    r2 = _upper_ratio(graph, k, theta_h2, s_lu, evaluator.fresh(5))
    return AlphaBar(min(r1, r2), r1, r2, rival, theta_h1, theta_h2)


def alpha_bar(graph, k, space, s_lu, num_cascades: int = DEFAULT_CASCADES, seed: int = 0,
              evaluator=None) -> float:
    return alpha_bar_detail(graph, k, space, s_lu, num_cascades, seed, evaluator).value


# ---------------------------------------------------------------------------
# certificate

@dataclass
class RobustCertificate:
    seed_set: list[int]
    alpha: float
    lower_bound: float
    alpha_bar: float
    estimator: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RobustCertificate":
        return cls(**json.loads(text))


def certify(graph: DirectedGraph, space: ParameterSpace, k: int, evaluator=None,
            num_cascades: int = DEFAULT_CASCADES, seed: int = 0, conservative: bool = False) -> RobustCertificate:
    """LUGreedy seed set together with its gap ratio, lower bound and heuristic upper bound."""
    evaluator = evaluator if evaluator is not None else ExactEvaluator()
    lu = lugreedy_detail(graph, k, space, evaluator)
    gap = gap_ratio_estimate(graph, k, space, lu.seeds, lu.plus_greedy, evaluator)
    bar = alpha_bar_detail(graph, k, space, lu.seeds, num_cascades, seed, evaluator)
    alpha = gap.conservative if conservative else gap.alpha
    meta = dict(evaluator.describe())
    meta.update({
        "alpha_variant": "conservative (mean - 2 SE)" if conservative else "point",
        "alpha_point": gap.alpha,
        "alpha_std_error": gap.std_error,
        "numerator_std_error": gap.numerator.std_error,
        "denominator_std_error": gap.denominator.std_error,
        "alpha_bar_cascades": num_cascades,
        "alpha_bar_seed": seed,
        "alpha_bar_simulation_theta": "interval midpoint",
        "alpha_bar_parts": {"competitor": bar.competitor_ratio, "incidence": bar.incidence_ratio},
        "k": k,
    })
    return RobustCertificate(list(lu.seeds), alpha, alpha * GREEDY_FACTOR, bar.value, meta)

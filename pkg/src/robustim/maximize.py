"""Seed selection: greedy hill climbing and a brute-force optimum for small instances."""
from __future__ import annotations

import heapq
from itertools import combinations
from math import comb

import numpy as np

from . import _kernels
from .graph import DirectedGraph, SeedSet, as_probabilities
from .spread import ExactEvaluator, InstanceTooLarge, MonteCarloEvaluator, ReachTable

TIE_TOL = 1e-12
EXACT_OPT_MAX_SUBSETS = 10**6


def greedy(graph: DirectedGraph, k: int, theta, evaluator=None, candidates=None) -> SeedSet:
    """k rounds of adding the node with the largest marginal spread; ties go to the lowest id.

    ``evaluator`` defaults to :class:`ExactEvaluator`. A
    :class:`MonteCarloEvaluator` runs lazy (CELF) greedy on a fixed bank of
    live-edge samples: on a fixed bank the estimated spread is an average of
    coverage functions, hence exactly submodular, and lazy evaluation returns
    the same set as the plain loop.
    """
    if k < 0 or k > graph.n:
        raise ValueError(f"k={k} must lie in 0..n={graph.n}")
    p = as_probabilities(theta, graph.m)
    cands = np.arange(graph.n) if candidates is None else np.unique(np.asarray(candidates, dtype=np.int64))
    if k > len(cands):
        raise ValueError(f"k={k} exceeds the {len(cands)} candidate nodes")
    if k == 0:
        return SeedSet()
    evaluator = evaluator if evaluator is not None else ExactEvaluator()
    if isinstance(evaluator, MonteCarloEvaluator):
        return SeedSet(_celf_monte_carlo(graph, k, p, evaluator, cands)[0])
    return SeedSet(_plain_greedy(graph, k, p, evaluator, cands))


def _plain_greedy(graph, k, p, evaluator, cands):
    chosen: list[int] = []
    remaining = [int(v) for v in cands]
    for _ in range(k):
        best_v, best_val = None, -np.inf
        for v in remaining:
            val = evaluator(graph, p, (*chosen, v))
            if val > best_val + TIE_TOL:
                best_v, best_val = v, val
        chosen.append(best_v)
        remaining.remove(best_v)
    return chosen


def _celf_monte_carlo(graph, k, p, evaluator: MonteCarloEvaluator, cands):
    """Returns (chosen nodes, total reached-node count over the sample bank)."""
    covered = np.zeros((evaluator.num_sims, graph.n), dtype=np.bool_)
    args = (graph.indptr, graph.out_eids, graph.dst, p, evaluator.seed)
    gains = _kernels.singleton_totals(*args, covered)[cands]
    # heap entries: (-gain, node, round in which gain was computed)
    heap = [(-int(g), int(v), 0) for g, v in zip(gains, cands)]
    heapq.heapify(heap)
    chosen: list[int] = []
    total = 0
    while len(chosen) < k:
        neg, v, rnd = heapq.heappop(heap)
        if rnd == len(chosen):
            chosen.append(v)
            total -= neg
            _kernels.add_cover(*args, covered, v)
            continue
        g = int(_kernels.marginal_totals(*args, covered, np.array([v], dtype=np.int64))[0])
        heapq.heappush(heap, (-g, v, len(chosen)))
    return chosen, total


def exact_optimal(graph: DirectedGraph, k: int, theta) -> tuple[SeedSet, float]:
    """Globally optimal size-k seed set by exhaustive search; ties go to the lexicographically first set."""
    if k < 0 or k > graph.n:
        raise ValueError(f"k={k} must lie in 0..n={graph.n}")
    if comb(graph.n, k) > EXACT_OPT_MAX_SUBSETS:
        raise InstanceTooLarge(f"C({graph.n},{k}) subsets exceeds the guard of {EXACT_OPT_MAX_SUBSETS}")
    p = as_probabilities(theta, graph.m)
    sets = [SeedSet(c) for c in combinations(range(graph.n), k)]
    if graph.m <= 16 and graph.n <= 62:
        values = ReachTable(graph).spreads(p, sets)[0]
    else:
        ev = ExactEvaluator()
        values = np.array([ev(graph, p, s) for s in sets])
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best] + TIE_TOL:
            best = i
    return sets[best], float(values[best])

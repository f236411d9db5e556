"""Influence spread under the independent cascade model.

``sigma_theta(S)`` is the expected number of nodes reachable from ``S`` in a
random live-edge graph where edge e is kept with probability ``theta[e]``.
Two evaluators are provided: exhaustive enumeration of live-edge graphs (exact,
small graphs only) and Monte Carlo simulation.
"""
from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import _kernels
from .graph import DirectedGraph, SeedSet, as_probabilities

EXACT_MAX_EDGES = 20
DEFAULT_NUM_SIMS = 10_000


class InstanceTooLarge(ValueError):
    """An exact oracle refused an instance beyond its enumeration guard."""


@dataclass(frozen=True)
class LiveEdgeGraph:
    graph: DirectedGraph
    live: np.ndarray

    def __post_init__(self):
        if len(self.live) != self.graph.m:
            raise ValueError("live mask length must equal the edge count")


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    num_sims: int
    std_error: float

    def __float__(self) -> float:
        return self.mean


def sample_live_edge(graph: DirectedGraph, theta, rng: np.random.Generator) -> LiveEdgeGraph:
    p = as_probabilities(theta, graph.m)
    return LiveEdgeGraph(graph, rng.random(graph.m) < p)


def reachable_set(live_graph: LiveEdgeGraph, seeds) -> set[int]:
    g, live = live_graph.graph, live_graph.live
    seen = set(int(s) for s in seeds)
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for e in g.out_edges(u):
            if live[e]:
                v = int(g.dst[e])
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
    return seen


# ---------------------------------------------------------------------------
# Monte Carlo

def derive_seed(seed: int, *tags: int) -> int:
    """Deterministic child seed in [0, 2**63) for a (seed, tags...) path."""
    state = np.random.SeedSequence([int(seed), *map(int, tags)]).generate_state(2, np.uint64)
    return int(state[0] >> np.uint64(1))


def _partitions(num_sims: int, workers: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, num_sims, max(1, min(workers, num_sims)) + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def estimate_spread(graph: DirectedGraph, theta, seeds, num_sims: int = DEFAULT_NUM_SIMS,
                    seed: int = 0, workers: int = 1) -> SpreadEstimate:
    """Monte Carlo estimate of ``sigma_theta(seeds)`` from ``num_sims`` live-edge graphs.

    Simulation i depends only on ``(seed, i)``; ``workers`` splits the index
    range into contiguous blocks, and the integer tallies are summed, so the
    result is identical for any worker count.
    """
    if num_sims < 1:
        raise ValueError("num_sims must be >= 1")
    p = as_probabilities(theta, graph.m)
    s = np.asarray(SeedSet(seeds, n=graph.n), dtype=np.int64)
    args = (graph.indptr, graph.out_eids, graph.dst, p, s, int(seed))
    parts = _partitions(num_sims, workers)
    if len(parts) > 1:
        with ThreadPoolExecutor(len(parts)) as pool:
            sums = list(pool.map(lambda ab: _kernels.spread_moments(*args, *ab), parts))
    else:
        sums = [_kernels.spread_moments(*args, *parts[0])]
    total = sum(a for a, _ in sums)
    total_sq = sum(b for _, b in sums)
    mean = total / num_sims
    if num_sims > 1:
        var = max(0.0, (total_sq - total * total / num_sims) / (num_sims - 1))
        se = math.sqrt(var / num_sims)
    else:
        se = 0.0
    return SpreadEstimate(mean=mean, num_sims=num_sims, std_error=se)


# ---------------------------------------------------------------------------
# exact enumeration

def _closure_edges(graph: DirectedGraph, p: np.ndarray, seeds) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and positive-probability edges reachable from ``seeds`` when all such edges are live."""
    seen = np.zeros(graph.n, dtype=bool)
    seen[list(seeds)] = True
    queue = deque(int(s) for s in seeds)
    edges = []
    while queue:
        u = queue.popleft()
        for e in graph.out_edges(u):
            if p[e] <= 0.0:
                continue
            edges.append(int(e))
            v = int(graph.dst[e])
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    return np.flatnonzero(seen), np.asarray(sorted(edges), dtype=np.int64)


def _reach_all_masks(num_nodes: int, src, dst, starts, sure_src=(), sure_dst=()) -> np.ndarray:
    """Boolean (2**len(src), num_nodes): reached nodes from ``starts`` in every live pattern.

    Row ``mask`` keeps edge j iff bit j of ``mask`` is set; the ``sure_*`` edges
    are live in every row.
    """
    num_masks = 1 << len(src)
    masks = np.arange(num_masks, dtype=np.int64)
    every = np.ones(num_masks, dtype=bool)
    triples = [(u, v, ((masks >> j) & 1).astype(bool))
               for j, (u, v) in enumerate(zip(list(src), list(dst)))]
    triples += [(u, v, every) for u, v in zip(list(sure_src), list(sure_dst))]
    reached = np.zeros((num_masks, num_nodes), dtype=bool)
    reached[:, list(starts)] = True
    changed = True
    while changed:
        changed = False
        for u, v, live in triples:
            new = reached[:, u] & live & ~reached[:, v]
            if new.any():
                reached[:, v] |= new
                changed = True
    return reached


def _pattern_probs(probs: np.ndarray) -> np.ndarray:
    """Probabilities of all 2**m live patterns for one or more parameter rows.

    ``probs`` has shape (..., m); the result has shape (..., 2**m).
    """
    probs = np.asarray(probs, dtype=np.float64)
    m = probs.shape[-1]
    out = np.ones(probs.shape[:-1] + (1,))
    # bit j of the pattern index is edge j: grow the table one edge at a time
    for j in range(m):
        pj = probs[..., j:j + 1]
        out = np.concatenate([out * (1.0 - pj), out * pj], axis=-1)
    return out


def exact_spread(graph: DirectedGraph, theta, seeds, max_edges: int = EXACT_MAX_EDGES) -> float:
    """Exact ``sigma_theta(seeds)`` by enumerating live-edge graphs.

    Only edges reachable from the seeds with probability strictly between 0
    and 1 are enumerated; edges with probability 1 are always live. Refuses
    when more than ``max_edges`` edges would be enumerated.
    """
    p = as_probabilities(theta, graph.m)
    s = SeedSet(seeds, n=graph.n)
    if not s:
        return 0.0
    nodes, edges = _closure_edges(graph, p, s)
    free = edges[p[edges] < 1.0]
    if len(free) > max_edges:
        raise InstanceTooLarge(
            f"exact_spread enumerates 2^{len(free)} live-edge graphs; guard is max_edges={max_edges}")
    local = -np.ones(graph.n, dtype=np.int64)
    local[nodes] = np.arange(len(nodes))
    sure = edges[p[edges] >= 1.0]
    reached = _reach_all_masks(len(nodes), local[graph.src[free]], local[graph.dst[free]],
                               local[list(s)], local[graph.src[sure]], local[graph.dst[sure]])
    sizes = reached.sum(axis=1)
    return float(_pattern_probs(p[free]) @ sizes)


class ReachTable:
    """All live-edge patterns of a small graph, with per-node reachability.

    Evaluates ``sigma_theta(S)`` for many (theta, S) pairs with one
    enumeration: ``spreads(thetas, sets)`` returns a (len(thetas), len(sets))
    matrix.
    """

    def __init__(self, graph: DirectedGraph, max_edges: int = 16):
        if graph.m > max_edges:
            raise InstanceTooLarge(f"ReachTable enumerates 2^{graph.m} patterns; guard is m <= {max_edges}")
        if graph.n > 62:
            raise InstanceTooLarge("ReachTable packs reachability into 62-bit words; n <= 62")
        self.graph = graph
        weights = np.left_shift(np.int64(1), np.arange(graph.n, dtype=np.int64))
        cols = []
        for v in range(graph.n):
            reached = _reach_all_masks(graph.n, graph.src, graph.dst, [v])
            cols.append(reached.astype(np.int64) @ weights)
        self.bits = np.stack(cols, axis=1) if cols else np.zeros((1 << graph.m, 0), np.int64)

    def sizes(self, sets) -> np.ndarray:
        """(2**m, len(sets)) reachable-set sizes."""
        out = np.empty((self.bits.shape[0], len(sets)), dtype=np.float64)
        for j, s in enumerate(sets):
            acc = np.zeros(self.bits.shape[0], dtype=np.int64)
            for v in s:
                acc |= self.bits[:, v]
            out[:, j] = _popcount(acc)
        return out

    def spreads(self, thetas, sets, chunk: int = 256) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
        sizes = self.sizes(sets)
        out = np.empty((len(thetas), len(sets)))
        for a in range(0, len(thetas), chunk):
            out[a:a + chunk] = _pattern_probs(thetas[a:a + chunk]) @ sizes
        return out


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64)
    count = np.zeros(x.shape, dtype=np.int64)
    while np.any(x):
        count += (x & np.uint64(1)).astype(np.int64)
        x >>= np.uint64(1)
    return count


def all_k_subsets(n: int, k: int) -> list[SeedSet]:
    return [SeedSet(c) for c in combinations(range(n), k)]


# ---------------------------------------------------------------------------
# evaluators: callables (graph, theta, seeds) -> float

class ExactEvaluator:
    exact = True

    def __init__(self, max_edges: int = EXACT_MAX_EDGES):
        self.max_edges = max_edges

    def __call__(self, graph, theta, seeds) -> float:
        return exact_spread(graph, theta, seeds, self.max_edges)

    def estimate(self, graph, theta, seeds) -> SpreadEstimate:
        return SpreadEstimate(self(graph, theta, seeds), 1, 0.0)

    def fresh(self, *tags) -> "ExactEvaluator":
        return self

    def describe(self) -> dict:
        return {"evaluator": "exact", "max_edges": self.max_edges}


class MonteCarloEvaluator:
    """Monte Carlo spread with a fixed seed: repeated calls share live-edge draws."""

    exact = False

    def __init__(self, num_sims: int = DEFAULT_NUM_SIMS, seed: int = 0, workers: int = 1):
        if num_sims < 1:
            raise ValueError("num_sims must be >= 1")
        self.num_sims = int(num_sims)
        self.seed = int(seed)
        self.workers = int(workers)

    def __call__(self, graph, theta, seeds) -> float:
        return self.estimate(graph, theta, seeds).mean

    def estimate(self, graph, theta, seeds) -> SpreadEstimate:
        return estimate_spread(graph, theta, seeds, self.num_sims, self.seed, self.workers)

    def fresh(self, *tags) -> "MonteCarloEvaluator":
        """Independent evaluator whose seed is derived from this one and ``tags``."""
        return MonteCarloEvaluator(self.num_sims, derive_seed(self.seed, *tags), self.workers)

    def describe(self) -> dict:
        return {"evaluator": "monte_carlo", "num_sims": self.num_sims, "seed": self.seed,
                "workers": self.workers}

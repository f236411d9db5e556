"""Fixture graphs and probability assignment for raw (multi-)edge lists."""
from __future__ import annotations

from collections import Counter
from typing import Iterable

import numpy as np

from .graph import DirectedGraph, GraphFormatError, ParameterSpace, _data_lines, as_probabilities


def weighted_cascade_probs(raw_edges: Iterable[tuple[int, int]], n: int | None = None):
    """Deduplicate a directed edge multiset and assign weighted-cascade probabilities.

    For a surviving edge e = (v, u), ``p_e = 1 - (1 - 1/x_u) ** y_e`` where x_u is
    the in-degree of u counting duplicates and y_e the multiplicity of (v, u).
    Edge ids follow first occurrence in ``raw_edges``.
    """
    raw = [(int(v), int(u)) for v, u in raw_edges]
    if not raw:
        raise ValueError("empty graph")
    for v, u in raw:
        if v == u:
            raise ValueError(f"self-loop on node {v}")
    mult = Counter(raw)
    indeg = Counter(u for _, u in raw)
    order = list(dict.fromkeys(raw))
    if n is None:
        n = max(max(e) for e in order) + 1
    graph = DirectedGraph.from_edges(n, order)
    theta = np.array([1.0 - (1.0 - 1.0 / indeg[u]) ** mult[v, u] for v, u in order])
    return graph, as_probabilities(theta, graph.m)


def load_edge_multiset(path) -> list[tuple[int, int]]:
    """Read ``u v`` lines keeping duplicates, for :func:`weighted_cascade_probs`."""
    out = []
    for lineno, cols in _data_lines(path):
        try:
            out.append((int(cols[0]), int(cols[1])))
        except (ValueError, IndexError):
            raise GraphFormatError(f"{path}:{lineno}: expected 'u v'") from None
    return out


def gen_star_forest(k_pairs: int, t: int, lower: float, upper: float):
    """``2 * k_pairs`` disjoint out-stars with ``t`` leaves each, every edge in [lower, upper].

    Star i occupies nodes ``i*(t+1) .. i*(t+1)+t`` with its center first.
    """
    if k_pairs < 1 or t < 1:
        raise ValueError("k_pairs and t must be positive")
    edges = []
    for i in range(2 * k_pairs):
        c = i * (t + 1)
        edges.extend((c, c + j) for j in range(1, t + 1))
    graph = DirectedGraph.from_edges(2 * k_pairs * (t + 1), edges)
    return graph, ParameterSpace(np.full(graph.m, float(lower)), np.full(graph.m, float(upper)))


def star_centers(k_pairs: int, t: int) -> list[int]:
    return [i * (t + 1) for i in range(2 * k_pairs)]


def gen_two_cluster_er(half_size: int, p_center: float, eps: float, seed: int = 0):
    """Two disjoint complete directed clusters with intervals ``p_center +/- eps``.

    Random live-edge draws on each cluster give an Erdos-Renyi digraph. The seed
    only permutes node labels, so the cluster split is not contiguous in ids.
    """
    if half_size < 2:
        raise ValueError("half_size must be at least 2")
    rng = np.random.default_rng(seed)
    label = rng.permutation(2 * half_size)
    edges = []
    for block in range(2):
        members = label[block * half_size:(block + 1) * half_size].tolist()
        edges.extend((u, v) for u in members for v in members if u != v)
    graph = DirectedGraph.from_edges(2 * half_size, edges)
    space = ParameterSpace.around(np.full(graph.m, float(p_center)), float(eps))
    return graph, space


def cluster_of(graph: DirectedGraph, half_size: int, seed: int = 0) -> np.ndarray:
    """Cluster index (0/1) of every node of :func:`gen_two_cluster_er` output."""
    label = np.random.default_rng(seed).permutation(2 * half_size)
    out = np.empty(2 * half_size, dtype=np.int64)
    out[label[:half_size]] = 0
    out[label[half_size:]] = 1
    return out


def gen_collaboration_multigraph(n: int, links_per_node: int = 3, seed: int = 0) -> list[tuple[int, int]]:
    """Synthetic co-authorship style edge multiset (both directions, with repeats).

    Each new node links to ``links_per_node`` earlier nodes drawn proportionally
    to degree + 1, with replacement, so repeated collaborations produce parallel
    edges that :func:`weighted_cascade_probs` merges.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    rng = np.random.default_rng(seed)
    weight = np.zeros(n)
    raw = []
    for v in range(1, n):
        w = weight[:v] + 1.0
        partners = rng.choice(v, size=links_per_node, p=w / w.sum())
        for u in partners.tolist():
            raw.append((v, u))
            raw.append((u, v))
            weight[u] += 1
            weight[v] += 1
    return raw


def gen_weighted_cascade_graph(n: int, links_per_node: int = 3, seed: int = 0):
    """Weighted-cascade probabilities on :func:`gen_collaboration_multigraph`."""
    return weighted_cascade_probs(gen_collaboration_multigraph(n, links_per_node, seed), n=n)


def width_space(theta, width: float) -> ParameterSpace:
    """Intervals of total width ``width`` centred on ``theta``, clamped into [0, 1]."""
    return ParameterSpace.around(theta, width / 2.0)

"""Directed graphs, per-edge probability vectors and interval parameter spaces.

Edge ids are dense integers assigned in file / creation order and are the only
key shared by graphs, probability vectors, parameter spaces and observations.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Raised for malformed graph or parameter-space files."""


@dataclass(frozen=True)
class DirectedGraph:
    n: int
    src: np.ndarray
    dst: np.ndarray
    # CSR out-adjacency: out-edge ids of node u are out_eids[indptr[u]:indptr[u+1]]
    indptr: np.ndarray = field(repr=False)
    out_eids: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "DirectedGraph":
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if n < 0:
            raise ValueError("node count must be non-negative")
        src, dst = pairs[:, 0].copy(), pairs[:, 1].copy()
        if len(src) and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n):
            raise ValueError(f"edge endpoint outside 0..{n - 1}")
        if np.any(src == dst):
            raise ValueError(f"self-loop at node {int(src[src == dst][0])}")
        keys = src * max(n, 1) + dst
        if len(np.unique(keys)) != len(keys):
            raise ValueError("duplicate edge")
        order = np.argsort(src, kind="stable")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        indptr = np.cumsum(indptr)
        for arr in (src, dst, order, indptr):
            arr.flags.writeable = False
        return cls(n=n, src=src, dst=dst, indptr=indptr, out_eids=order)

    @property
    def m(self) -> int:
        return len(self.src)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    def out_edges(self, u: int) -> np.ndarray:
        return self.out_eids[self.indptr[u]:self.indptr[u + 1]]

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.n)

    def edge_id(self, u: int, v: int) -> int:
        for e in self.out_edges(u):
            if self.dst[e] == v:
                return int(e)
        raise KeyError((u, v))

    def without_nodes(self, nodes: Iterable[int]) -> tuple["DirectedGraph", np.ndarray, np.ndarray]:
        """Induced subgraph on the remaining nodes.

        Returns ``(subgraph, node_ids, edge_ids)`` where ``node_ids[i]`` and
        ``edge_ids[j]`` map subgraph ids back to ids in ``self``.
        """
        drop = np.zeros(self.n, dtype=bool)
        drop[list(nodes)] = True
        keep_nodes = np.flatnonzero(~drop)
        relabel = -np.ones(self.n, dtype=np.int64)
        relabel[keep_nodes] = np.arange(len(keep_nodes))
        keep_edges = np.flatnonzero(~drop[self.src] & ~drop[self.dst])
        sub = DirectedGraph.from_edges(
            len(keep_nodes), zip(relabel[self.src[keep_edges]], relabel[self.dst[keep_edges]])
        )
        return sub, keep_nodes, keep_edges

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DirectedGraph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst))

    def __hash__(self) -> int:
        return hash((self.n, self.src.tobytes(), self.dst.tobytes()))


def as_probabilities(p: Sequence[float] | np.ndarray, m: int | None = None) -> np.ndarray:
    """Validate a parameter vector: one probability in [0, 1] per edge."""
    arr = np.array(p, dtype=np.float64).reshape(-1)
    if m is not None and len(arr) != m:
        raise ValueError(f"parameter vector has length {len(arr)}, graph has {m} edges")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("probabilities must lie in [0, 1]")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ParameterSpace:
    """Per-edge probability intervals ``[lower[e], upper[e]]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_probabilities(self.lower)
        hi = as_probabilities(self.upper)
        if lo.shape != hi.shape:
            raise ValueError("lower and upper must have the same length")
        if np.any(lo > hi):
            e = int(np.flatnonzero(lo > hi)[0])
            raise ValueError(f"edge {e}: lower {lo[e]} exceeds upper {hi[e]}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def point(cls, theta) -> "ParameterSpace":
        return cls(theta, theta)

    @classmethod
    def around(cls, theta, half_width) -> "ParameterSpace":
        """``[p - w, p + w]`` clamped into [0, 1]."""
        p = np.asarray(theta, dtype=np.float64)
        return cls(np.clip(p - half_width, 0.0, 1.0), np.clip(p + half_width, 0.0, 1.0))

    @property
    def m(self) -> int:
        return len(self.lower)

    def theta_minus(self) -> np.ndarray:
        return self.lower

    def theta_plus(self) -> np.ndarray:
        return self.upper

    def midpoint(self) -> np.ndarray:
        return (self.lower + self.upper) / 2.0

    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def is_point(self) -> bool:
        return bool(np.all(self.lower == self.upper))

    def contains(self, theta) -> bool:
        p = np.asarray(theta, dtype=np.float64)
        return bool(np.all((self.lower <= p) & (p <= self.upper)))

    def contains_space(self, other: "ParameterSpace") -> bool:
        return bool(np.all(self.lower <= other.lower) and np.all(other.upper <= self.upper))


class SeedSet(tuple):
    """Immutable seed set, canonically sorted ascending."""

    def __new__(cls, nodes: Iterable[int] = (), n: int | None = None):
        items = sorted(int(v) for v in nodes)
        if len(set(items)) != len(items):
            raise ValueError("duplicate node in seed set")
        if items and items[0] < 0:
            raise ValueError("negative node id in seed set")
        if n is not None and items and items[-1] >= n:
            raise ValueError(f"seed {items[-1]} outside graph with {n} nodes")
        return super().__new__(cls, items)

    @property
    def k(self) -> int:
        return len(self)

    def union(self, *nodes: int) -> "SeedSet":
        return SeedSet((*self, *nodes))

    def __str__(self) -> str:
        return ";".join(map(str, self))

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "SeedSet":
        parts = [t for t in text.replace(",", ";").split(";") if t.strip()]
        return cls((int(t) for t in parts), n=n)


# ---------------------------------------------------------------------------
# file I/O

def _data_lines(path, header: dict | None = None):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if header is not None:
                    for tok in line[1:].split():
                        key, _, val = tok.partition("=")
                        if key == "n" and val.isdigit():
                            header["n"] = int(val)
                continue
            yield lineno, line.split("\t") if "\t" in line else line.split()


def load_graph(path, n: int | None = None) -> tuple[DirectedGraph, np.ndarray | None]:
    """Read a tab-separated edge list, ``u v`` or ``u v p`` per line.

    Returns the graph and, when every line carries a third column, the
    probability vector (otherwise ``None``). Node count comes from ``n``, then
    a ``# n=<count>`` comment, then ``max id + 1``.
    """
    pairs: list[tuple[int, int]] = []
    probs: list[float] = []
    seen: dict[tuple[int, int], int] = {}
    width = None
    header: dict = {}
    for lineno, cols in _data_lines(path, header):
        if len(cols) not in (2, 3):
            raise GraphFormatError(f"{path}:{lineno}: expected 2 or 3 columns, got {len(cols)}")
        try:
            u, v = int(cols[0]), int(cols[1])
            p = float(cols[2]) if len(cols) == 3 else None
        except ValueError as exc:
            raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
        if u < 0 or v < 0:
            raise GraphFormatError(f"{path}:{lineno}: negative node id")
        if u == v:
            raise GraphFormatError(f"{path}:{lineno}: self-loop on node {u}")
        if (u, v) in seen:
            raise GraphFormatError(f"{path}:{lineno}: duplicate edge {u}->{v} (first on line {seen[u, v]})")
        if p is not None and not 0.0 <= p <= 1.0:
            raise GraphFormatError(f"{path}:{lineno}: probability {p} outside [0, 1]")
        if width is None:
            width = len(cols)
        elif len(cols) != width:
            raise GraphFormatError(f"{path}:{lineno}: expected {width} columns like the first edge line")
        seen[u, v] = lineno
        pairs.append((u, v))
        if p is not None:
            probs.append(p)
    if not pairs:
        raise GraphFormatError(f"{path}: empty graph")
    top = max(max(u, v) for u, v in pairs) + 1
    if n is None:
        n = header.get("n")
    if n is not None and n < top:
        raise GraphFormatError(f"{path}: node id {top - 1} exceeds declared n={n}")
    graph = DirectedGraph.from_edges(n if n is not None else top, pairs)
    return graph, (as_probabilities(probs, graph.m) if probs else None)


def save_graph(path, graph: DirectedGraph, theta=None) -> None:
    lines = [f"# n={graph.n} m={graph.m}"]
    if theta is None:
        lines += [f"{u}\t{v}" for u, v in graph.edges]
    else:
        theta = as_probabilities(theta, graph.m)
        lines += [f"{u}\t{v}\t{p!r}" for (u, v), p in zip(graph.edges, theta.tolist())]
    _atomic_write(path, "\n".join(lines) + "\n")


def load_space(path, m: int | None = None) -> ParameterSpace:
    """Read ``eid<TAB>l<TAB>r`` lines; every edge id 0..m-1 exactly once."""
    rows: dict[int, tuple[float, float]] = {}
    for lineno, cols in _data_lines(path):
        if len(cols) != 3:
            raise GraphFormatError(f"{path}:{lineno}: expected 'eid l r', got {len(cols)} columns")
        try:
            e, lo, hi = int(cols[0]), float(cols[1]), float(cols[2])
        except ValueError as exc:
            raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
        if e in rows:
            raise GraphFormatError(f"{path}:{lineno}: edge id {e} repeated")
        if not (0.0 <= lo <= hi <= 1.0):
            raise GraphFormatError(f"{path}:{lineno}: need 0 <= l <= r <= 1, got [{lo}, {hi}]")
        rows[e] = (lo, hi)
    if not rows:
        raise GraphFormatError(f"{path}: empty parameter space")
    size = m if m is not None else max(rows) + 1
    if sorted(rows) != list(range(size)):
        raise GraphFormatError(f"{path}: edge ids must cover 0..{size - 1} exactly")
    lo, hi = zip(*(rows[e] for e in range(size)))
    return ParameterSpace(np.array(lo), np.array(hi))


def save_space(path, space: ParameterSpace) -> None:
    lines = [f"{e}\t{lo!r}\t{hi!r}" for e, (lo, hi) in
             enumerate(zip(space.lower.tolist(), space.upper.tolist()))]
    _atomic_write(path, "\n".join(lines) + "\n")


def _atomic_write(path, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustim import DirectedGraph, GraphFormatError, ParameterSpace, SeedSet
from robustim import load_graph, load_space, save_graph, save_space
from robustim.generators import (cluster_of, gen_star_forest, gen_two_cluster_er, gen_weighted_cascade_graph,
                                 load_edge_multiset, weighted_cascade_probs, width_space)

from _instances import graph_and_theta


def write(tmp_path, text, name="g.tsv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


# ---- parsing ---------------------------------------------------------------

def test_single_edge_with_probability(tmp_path):
    g, theta = load_graph(write(tmp_path, "0\t1\t0.5\n"))
    assert (g.n, g.m) == (2, 1)
    assert theta.tolist() == [0.5]


def test_comments_and_blank_lines_skipped(tmp_path):
    g, theta = load_graph(write(tmp_path, "# a comment\n\n0\t1\n1\t2\n"))
    assert g.edges == [(0, 1), (1, 2)]
    assert theta is None


def test_empty_file_rejected(tmp_path):
    with pytest.raises(GraphFormatError, match="empty graph"):
        load_graph(write(tmp_path, "# nothing here\n"))


def test_probability_out_of_range_reports_line(tmp_path):
    with pytest.raises(GraphFormatError, match=r":3: probability 1.3"):
        load_graph(write(tmp_path, "0\t1\t0.5\n# skip\n1\t2\t1.3\n"))


@pytest.mark.parametrize("text, msg", [
    ("0\t0\t0.5\n", "self-loop"),
    ("0\t1\n0\t1\n", "duplicate edge"),
    ("0\t1\t0.2\t7\n", "2 or 3 columns"),
    ("0\t1\t0.5\n1\t2\n", "columns like the first"),
    ("-1\t2\n", "negative"),
    ("a\tb\n", ":1:"),
])
def test_malformed_lines(tmp_path, text, msg):
    with pytest.raises(GraphFormatError, match=msg):
        load_graph(write(tmp_path, text))


def test_declared_n_keeps_isolated_nodes(tmp_path):
    g, _ = load_graph(write(tmp_path, "# n=5\n0\t1\n"))
    assert g.n == 5


def test_from_edges_validation():
    with pytest.raises(ValueError):
        DirectedGraph.from_edges(2, [(0, 2)])
    with pytest.raises(ValueError):
        DirectedGraph.from_edges(2, [(1, 1)])
    g = DirectedGraph.from_edges(3, [(0, 1), (0, 2), (2, 1)])
    assert g.edge_id(2, 1) == 2
    assert sorted(g.out_edges(0).tolist()) == [0, 1]
    assert g.in_degree().tolist() == [0, 2, 1]


def test_without_nodes_maps_ids():
    g = DirectedGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    sub, nodes, eids = g.without_nodes([1])
    assert nodes.tolist() == [0, 2, 3]
    assert [(nodes[u], nodes[v]) for u, v in sub.edges] == [(2, 3), (3, 0)]
    assert eids.tolist() == [2, 3]


@settings(max_examples=50, deadline=None)
@given(graph_and_theta())
def test_round_trip(tmp_path_factory, gt):
    g, theta = gt
    path = tmp_path_factory.mktemp("rt") / "g.tsv"
    save_graph(path, g, theta)
    g2, theta2 = load_graph(path)
    assert g2 == g
    assert g2.edges == g.edges
    assert np.array_equal(theta2, theta)


def test_space_round_trip_and_errors(tmp_path):
    space = ParameterSpace(np.array([0.1, 0.0, 0.3]), np.array([0.2, 1.0, 0.3]))
    p = tmp_path / "s.tsv"
    save_space(p, space)
    back = load_space(p, 3)
    assert np.array_equal(back.lower, space.lower) and np.array_equal(back.upper, space.upper)
    with pytest.raises(GraphFormatError, match="cover"):
        load_space(p, 4)
    with pytest.raises(GraphFormatError, match="l <= r"):
        load_space(write(tmp_path, "0\t0.5\t0.2\n", "bad.tsv"))
    with pytest.raises(GraphFormatError, match="repeated"):
        load_space(write(tmp_path, "0\t0.1\t0.2\n0\t0.1\t0.2\n", "dup.tsv"))


# ---- value types -----------------------------------------------------------

def test_parameter_space_invariants():
    with pytest.raises(ValueError):
        ParameterSpace(np.array([0.5]), np.array([0.4]))
    with pytest.raises(ValueError):
        ParameterSpace(np.array([-0.1]), np.array([0.4]))
    s = ParameterSpace.around(np.array([0.05, 0.5, 0.98]), 0.1)
    assert np.allclose(s.lower, [0.0, 0.4, 0.88])
    assert np.allclose(s.upper, [0.15, 0.6, 1.0])
    assert s.contains([0.1, 0.5, 0.9]) and not s.contains([0.2, 0.5, 0.9])
    assert ParameterSpace.point([0.3]).is_point()
    assert s.contains_space(ParameterSpace.point([0.1, 0.5, 0.9]))


def test_seed_set_canonical():
    s = SeedSet([4, 0, 2])
    assert tuple(s) == (0, 2, 4) and str(s) == "0;2;4"
    assert SeedSet.parse("4,0;2") == s
    assert s.union(1) == SeedSet([0, 1, 2, 4])
    with pytest.raises(ValueError):
        SeedSet([1, 1])
    with pytest.raises(ValueError):
        SeedSet([5], n=5)


# ---- generators ------------------------------------------------------------

def test_weighted_cascade_values():
    raw = [(1, 0), (2, 0), (3, 0), (3, 0), (0, 5)]
    g, p = weighted_cascade_probs(raw)
    by_edge = dict(zip(g.edges, p.tolist()))
    assert by_edge[(1, 0)] == pytest.approx(0.25)
    assert by_edge[(3, 0)] == pytest.approx(0.4375)
    assert by_edge[(0, 5)] == pytest.approx(1.0)
    assert g.m == 4


def test_weighted_cascade_rejects_self_loop_and_empty():
    with pytest.raises(ValueError):
        weighted_cascade_probs([(1, 1)])
    with pytest.raises(ValueError):
        weighted_cascade_probs([])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)).filter(lambda e: e[0] != e[1]), min_size=1))
def test_weighted_cascade_range_and_monotone(raw):
    g, p = weighted_cascade_probs(raw)
    assert np.all((p > 0) & (p <= 1))
    x = max(r[1] for r in raw) + 2
    for y in range(1, 4):
        vals = [1 - (1 - 1 / xx) ** y for xx in range(1, x)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_load_edge_multiset_keeps_duplicates(tmp_path):
    assert load_edge_multiset(write(tmp_path, "0 1\n0 1\n")) == [(0, 1), (0, 1)]


def test_star_forest_counts():
    g, space = gen_star_forest(2, 3, 0.2, 0.8)
    assert (g.n, g.m) == (16, 12)
    assert np.all(space.lower == 0.2) and np.all(space.upper == 0.8)
    assert gen_star_forest(1, 1, 0.4, 0.4)[1].is_point()
    for bad in [(0, 3), (2, 0)]:
        with pytest.raises(ValueError):
            gen_star_forest(*bad, 0.2, 0.8)


def test_two_cluster_structure():
    g, space = gen_two_cluster_er(3, 0.5, 0.1, seed=4)
    assert g.m == 12
    cl = cluster_of(g, 3, seed=4)
    assert all(cl[u] == cl[v] for u, v in g.edges)
    assert [int(np.sum(cl[g.src] == c)) for c in (0, 1)] == [6, 6]
    assert gen_two_cluster_er(3, 0.5, 0.0)[1].is_point()
    assert gen_two_cluster_er(3, 0.5, 0.1, seed=4)[0] == g
    with pytest.raises(ValueError):
        gen_two_cluster_er(1, 0.5, 0.1)


def test_wc_graph_deterministic_and_width_space():
    g1, p1 = gen_weighted_cascade_graph(60, 2, seed=3)
    g2, p2 = gen_weighted_cascade_graph(60, 2, seed=3)
    assert g1 == g2 and np.array_equal(p1, p2)
    s = width_space(p1, 0.2)
    assert s.contains(p1)
    assert np.all(s.width() <= 0.2 + 1e-12)

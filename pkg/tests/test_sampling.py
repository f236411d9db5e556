import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustim import (DirectedGraph, ExactEvaluator, GroundTruthEnv, ObservationSet, ParameterSpace,
                      cascade_with_observation, confidence_intervals, ics_rim, oes_rim, plan_uniform,
                      robust_ratio_exact, us_rim_iterative, us_rim_oneshot)
from robustim.generators import gen_star_forest
from robustim.robust import GREEDY_FACTOR
from robustim.sampling import TRACE_COLUMNS, sample_uniform, write_trace_csv

from _instances import random_graph

EX = ExactEvaluator()
SINGLE = DirectedGraph.from_edges(2, [(0, 1)])
PATH = DirectedGraph.from_edges(3, [(0, 1), (1, 2)])


def obs_with(trials, successes):
    return ObservationSet(np.array(trials), np.array(successes))


# ---- confidence intervals ----------------------------------------------------

def test_interval_hand_value():
    space = confidence_intervals(obs_with([300], [150]), 0.2)
    assert space.lower[0] == pytest.approx(0.40360, abs=1e-5)
    assert space.upper[0] == pytest.approx(0.61943, abs=1e-5)


def test_untried_edge_is_unit_interval():
    space = confidence_intervals(obs_with([0, 10], [0, 5]), 0.1)
    assert (space.lower[0], space.upper[0]) == (0.0, 1.0)


def test_interval_clamped():
    space = confidence_intervals(obs_with([5, 5], [0, 5]), 0.1)
    assert space.lower[0] == 0.0 and space.upper[1] == 1.0


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10**5), st.floats(0, 1), st.floats(0.01, 0.99))
def test_doubling_trials_narrows(t, p_hat, gamma):
    c2 = lambda tt: 3 * math.log(2 / gamma) / tt
    width = lambda tt: 2 * math.sqrt(c2(tt)) * math.sqrt(c2(tt) / 4 + p_hat)
    assert width(2 * t) < width(t)
    s = round(p_hat * t)
    one = confidence_intervals(obs_with([t], [s]), gamma)
    two = confidence_intervals(obs_with([2 * t], [2 * s]), gamma)
    assert two.width()[0] <= one.width()[0] + 1e-15


def test_interval_rejects_bad_gamma():
    with pytest.raises(ValueError):
        confidence_intervals(obs_with([1], [0]), 1.5)


# ---- observation sets --------------------------------------------------------

tallies = st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=3, max_size=3).map(
    lambda rows: obs_with([a + b for a, b in rows], [a for a, _ in rows]))


@given(tallies, tallies, tallies)
def test_merge_associative_commutative(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a


def test_observation_validation_and_p_hat():
    with pytest.raises(ValueError):
        obs_with([1], [2])
    obs = obs_with([4, 0], [1, 0])
    assert obs.p_hat()[0] == 0.25 and math.isnan(obs.p_hat()[1])
    obs.record([1, 1], [True, False])
    assert obs.trials.tolist() == [4, 2] and obs.successes.tolist() == [1, 1]
    assert obs.avg_samples_per_edge() == 3.0


# ---- uniform plan ------------------------------------------------------------

def graph_with(n, m):
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v][:m]
    return DirectedGraph.from_edges(n, pairs)


def test_plan_additive_hand_value():
    plan = plan_uniform(graph_with(10, 20), 2, 0.5, 0.1)
    assert plan.t == 479318
    assert plan.half_width == pytest.approx(2 * 0.5 / 200)


def test_plan_scales_with_edges_squared():
    t1 = plan_uniform(graph_with(10, 5), 1, 0.5, 0.1).t
    t4 = plan_uniform(graph_with(10, 20), 1, 0.5, 0.1).t
    assert t4 / t1 == pytest.approx(16 * math.log(400) / math.log(100), rel=1e-4)


def test_plan_multiplicative():
    g = graph_with(10, 20)
    with pytest.raises(ValueError):
        plan_uniform(g, 2, 0.5, 0.1, "multiplicative")
    limit = 3 * math.log(400) / 0.2
    ts = [plan_uniform(g, 2, eps, 0.1, "multiplicative", 0.2).t for eps in (0.5, 0.9, 0.999, 1 - 1e-15)]
    assert all(a > b for a, b in zip(ts, ts[1:]))
    assert ts[-1] > limit
    big_l = math.log(1 / (1 - 0.9))
    plan = plan_uniform(g, 2, 0.9, 0.1, "multiplicative", 0.2)
    assert plan.relative_slack == pytest.approx(big_l / (20 + big_l))


def test_oneshot_all_ones():
    g = PATH
    plan = plan_uniform(g, 1, 0.9, 0.5, "multiplicative", 1.0)
    space, seeds = us_rim_oneshot(GroundTruthEnv(np.ones(2), 0), g, 1, plan, EX)
    assert np.all(space.upper == 1.0)
    assert seeds == (0,)


def test_oneshot_coverage():
    g = random_graph(np.random.default_rng(2), 4, 5)
    while g.m != 5:
        g = random_graph(np.random.default_rng(g.n + g.m), 5, 5, n_min=4)
    theta = np.linspace(0.1, 0.9, g.m)
    plan = plan_uniform(g, 1, 0.5, 0.1)
    hits = 0
    for rep in range(1000):
        space, _ = us_rim_oneshot(GroundTruthEnv(theta, rep), g, 1, plan, EX)
        hits += space.contains(theta)
    assert hits / 1000 >= 0.9 - 3 * math.sqrt(0.09 / 1000)


def test_oneshot_deterministic():
    plan = plan_uniform(PATH, 1, 0.5, 0.1)
    a = us_rim_oneshot(GroundTruthEnv([0.3, 0.7], 5), PATH, 1, plan, EX)
    b = us_rim_oneshot(GroundTruthEnv([0.3, 0.7], 5), PATH, 1, plan, EX)
    assert np.array_equal(a[0].lower, b[0].lower) and a[1] == b[1]


# ---- cascades ----------------------------------------------------------------

def test_cascade_all_live():
    obs = cascade_with_observation(GroundTruthEnv([1.0, 1.0]), PATH, ObservationSet.empty(2), [0])
    assert obs.trials.tolist() == [1, 1] and obs.successes.tolist() == [1, 1]


def test_cascade_all_dead_sees_only_seed_edges():
    g = DirectedGraph.from_edges(4, [(0, 1), (0, 2), (1, 3)])
    obs = cascade_with_observation(GroundTruthEnv(np.zeros(3)), g, ObservationSet.empty(3), [0])
    assert obs.trials.tolist() == [1, 1, 0] and obs.successes.sum() == 0


def test_cascade_never_sees_unreachable_edge():
    g = DirectedGraph.from_edges(5, [(0, 1), (1, 2), (3, 4)])
    env = GroundTruthEnv([0.9, 0.9, 0.9], seed=1)
    obs = ObservationSet.empty(3)
    for _ in range(200):
        cascade_with_observation(env, g, obs, [0])
    assert obs.trials[2] == 0 and obs.trials[0] == 200


# ---- iterative samplers ------------------------------------------------------

def test_us_iterative_terminates_and_steps_by_batch():
    res = us_rim_iterative(GroundTruthEnv([0.5], 3), SINGLE, 1, 400, 0.8, 0.1, evaluator=EX)
    assert res.stop_reason == "kappa" and res.alpha >= 0.8 and not res.truncated
    steps = np.diff([r.avg_samples_per_edge for r in res.trace])
    assert np.all(steps == 400)


def test_us_iterative_alpha_follows_star_formula():
    g, _ = gen_star_forest(1, 2, 0.3, 0.6)
    theta = np.array([0.3, 0.3, 0.6, 0.6])
    res = us_rim_iterative(GroundTruthEnv(theta, 8), g, 1, 300, 0.8, 0.1, evaluator=EX)
    lo, hi = res.space.lower, res.space.upper
    star = lambda c, p: 1 + p[g.src == c].sum()
    want = star(res.seeds[0], lo) / max(star(0, hi), star(3, hi))
    assert res.alpha == pytest.approx(want)
    alphas = [r.alpha for r in res.trace]
    assert alphas[-1] > alphas[0]


def test_point_like_initial_samples_stop_at_zero():
    obs0 = obs_with([10**9], [5 * 10**8])
    res = ics_rim(GroundTruthEnv([0.5]), SINGLE, 1, obs0, 0.8, 0.1, cascades=10, evaluator=EX)
    assert len(res.trace) == 1 and res.stop_reason == "kappa"


def test_ics_guarantee_on_stop():
    g, _ = gen_star_forest(1, 2, 0.3, 0.6)
    theta = np.array([0.3, 0.3, 0.6, 0.6])
    env = GroundTruthEnv(theta, 2)
    obs0 = sample_uniform(env, ObservationSet.empty(4), 318)
    res = ics_rim(env, g, 1, obs0, 0.8, 0.1, cascades=300, evaluator=EX)
    assert res.stop_reason == "kappa" and res.alpha > 0.8
    assert robust_ratio_exact(g, 1, res.space, res.seeds) >= 0.8 * GREEDY_FACTOR


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_ics_observes_only_reachable_edges(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, 6, 8)
    res = ics_rim(GroundTruthEnv(rng.random(g.m), seed), g, 1, None, 0.99, 0.1, cascades=20,
                  max_iters=4, evaluator=EX)
    reach = set()
    for row in res.trace:
        frontier = list(row.seed_set)
        seen = set(frontier)
        while frontier:
            u = frontier.pop()
            for e in g.out_edges(u).tolist():
                reach.add(e)
                v = int(g.dst[e])
                if v not in seen:
                    seen.add(v)
                    frontier.append(v)
    untouched = [e for e in range(g.m) if e not in reach]
    assert np.all(res.observations.trials[untouched] == 0)


def test_oes_samples_only_center_edges():
    g = DirectedGraph.from_edges(4, [(0, 1), (0, 2), (1, 3)])
    res = oes_rim(GroundTruthEnv([0.5, 0.5, 0.5], 1), g, 1, None, 0.1, per_edge=50, max_iters=5, evaluator=EX)
    assert set(res.seeds) == {0}
    assert res.observations.trials[2] == 0
    assert res.observations.trials[0] == res.observations.trials[1] > 0


def test_oes_two_star_plateau():
    g, _ = gen_star_forest(1, 2, 0.3, 0.3)
    res = oes_rim(GroundTruthEnv(np.full(4, 0.3), 4), g, 1, None, 0.1, per_edge=200, max_iters=30, evaluator=EX)
    other = g.src != res.seeds[0]
    assert np.all(res.observations.trials[other] == 0)
    assert np.all(res.space.upper[other] == 1.0)
    assert res.stop_reason == "stable" and res.alpha < 0.8


def test_traces_reproducible(tmp_path):
    g, _ = gen_star_forest(1, 2, 0.3, 0.6)
    theta = np.array([0.3, 0.3, 0.6, 0.6])
    runs = [us_rim_iterative(GroundTruthEnv(theta, 6), g, 1, 100, 0.8, 0.1, max_iters=5, evaluator=EX)
            for _ in range(2)]
    paths = []
    for i, r in enumerate(runs):
        paths.append(tmp_path / f"t{i}.csv")
        write_trace_csv(paths[-1], r.trace, timing=False)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].read_text().splitlines()[0] == ",".join(TRACE_COLUMNS)


def test_truncated_run_returns_best_iteration():
    obs0 = ObservationSet.empty(1)
    res = us_rim_iterative(GroundTruthEnv([0.5], 3), SINGLE, 1, 1, 0.99, 0.1, max_iters=2, obs0=obs0,
                           evaluator=EX)
    assert res.truncated and res.stop_reason == "max_iters"
    assert res.alpha == max(r.alpha for r in res.trace)
    assert obs0.trials[0] == 0


def test_sample_uniform_counts():
    env = GroundTruthEnv([0.2, 0.8], 0)
    obs = sample_uniform(env, ObservationSet.empty(2), 50)
    assert obs.trials.tolist() == [50, 50] and env.draws.tolist() == [50, 50]

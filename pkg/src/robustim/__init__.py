"""Robust influence maximization under the independent cascade model."""

__version__ = "0.1.0"

from .graph import DirectedGraph, GraphFormatError, ParameterSpace, SeedSet, load_graph, load_space, save_graph, save_space
from .generators import gen_star_forest, gen_two_cluster_er, gen_weighted_cascade_graph, weighted_cascade_probs
from .spread import (ExactEvaluator, InstanceTooLarge, LiveEdgeGraph, MonteCarloEvaluator, SpreadEstimate,
                     estimate_spread, exact_spread, reachable_set, sample_live_edge)
from .maximize import exact_optimal, greedy
from .robust import (RobustCertificate, alpha_bar, certify, gap_ratio, lugreedy, robust_ratio_exact)
from .sampling import (GroundTruthEnv, ObservationSet, SamplingPlan, cascade_with_observation, confidence_intervals,
                       ics_rim, oes_rim, plan_uniform, us_rim_iterative, us_rim_oneshot)

__all__ = [
    "DirectedGraph", "GraphFormatError", "ParameterSpace", "SeedSet", "load_graph", "load_space", "save_graph",
    "save_space", "gen_star_forest", "gen_two_cluster_er", "gen_weighted_cascade_graph", "weighted_cascade_probs",
    "ExactEvaluator", "InstanceTooLarge", "LiveEdgeGraph", "MonteCarloEvaluator", "SpreadEstimate",
    "estimate_spread", "exact_spread", "reachable_set", "sample_live_edge", "exact_optimal", "greedy",
    "RobustCertificate", "alpha_bar", "certify", "gap_ratio", "lugreedy", "robust_ratio_exact",
    "GroundTruthEnv", "ObservationSet", "SamplingPlan", "cascade_with_observation", "confidence_intervals",
    "ics_rim", "oes_rim", "plan_uniform", "us_rim_iterative", "us_rim_oneshot",
]

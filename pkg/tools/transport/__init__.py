from .algorithms import (
    BStar,
    Greedy,
    NearestSiteLift,
    Permutation,
    SubtreeDecomposition,
    make_algorithm,
)
from .decomposition import Decomposition, decompose
from .hybrid import HybridSpec, run_hybrid, run_hybrid_lemma_suite
from .instance import GeneratorConfig, OnlineInstance, generate, load_instance, parse_instance
from .metric import MetricSpace, WeightedTree, mst_of_metric, round_to_power_of_two
from .online import run_online
from .oracle import CostModel, opt_cost, worst_case_ratio
from .report import Finding, RatioRow, SweepReport
from .sweeps import SweepOptions, verify_bounds

__all__ = [
    "BStar",
    "CostModel",
    "Decomposition",
    "Finding",
    "GeneratorConfig",
    "Greedy",
    "HybridSpec",
    "MetricSpace",
    "NearestSiteLift",
    "OnlineInstance",
    "Permutation",
    "RatioRow",
    "SubtreeDecomposition",
    "SweepOptions",
    "SweepReport",
    "WeightedTree",
    "decompose",
    "generate",
    "load_instance",
    "make_algorithm",
    "mst_of_metric",
    "opt_cost",
    "parse_instance",
    "round_to_power_of_two",
    "run_hybrid",
    "run_hybrid_lemma_suite",
    "run_online",
    "verify_bounds",
    "worst_case_ratio",
]

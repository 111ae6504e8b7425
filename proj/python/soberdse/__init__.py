"""Design-space explorer portfolio with a learned per-instance selector."""

from ._core import (
    BenchmarkInstance,
    ExplorerId,
    Family,
    SizeClass,
    SurrogateModel,
    adrs,
    cross_entropy,
    dominates,
    entropy,
    explore,
    extract_features,
    gae,
    generate,
    load,
    pareto_filter,
    reward,
    run_portfolio,
    softmax,
    synth_instance,
)

__all__ = [
    "BenchmarkInstance",
    "ExplorerId",
    "Family",
    "SizeClass",
    "SurrogateModel",
    "adrs",
    "cross_entropy",
    "dominates",
    "entropy",
    "explore",
    "extract_features",
    "gae",
    "generate",
    "load",
    "pareto_filter",
    "reward",
    "run_portfolio",
    "softmax",
    "synth_instance",
]

"""Sensitivity-sampling coresets for regularized monotonic-kernel losses."""

from .core import (KernelKind, KernelSpec, WeightedPointSet, cost, point_costs, sigmoid, softplus,
                   total_cost, total_cost_gradient, total_costs)
from .sampler import Coreset, build_coreset, coreset_size, monotonic_coreset, uniform_sample
from .sensitivity import (SensitivityProfile, empirical_sensitivities, empirical_sensitivity,
                          logistic_sensitivity, sensitivity_for, sigmoid_sensitivity, weighted_sensitivity)
from .solver import SolveResult, minimize, multistart_minimize
from .stream import MergeTreeConfig, merge, stream_coreset
from .verifier import (build_separable_set, find_intersection, lower_bound_demo, ratio_simple_sweep,
                       regularized_ratio_sweep)

__version__ = "0.1.0"

__all__ = [
    "KernelKind", "KernelSpec", "WeightedPointSet", "cost", "point_costs", "sigmoid", "softplus",
    "total_cost", "total_cost_gradient", "total_costs", "Coreset", "build_coreset", "coreset_size",
    "monotonic_coreset", "uniform_sample", "SensitivityProfile", "empirical_sensitivities",
    "empirical_sensitivity", "logistic_sensitivity", "sensitivity_for", "sigmoid_sensitivity",
    "weighted_sensitivity", "SolveResult", "minimize", "multistart_minimize", "MergeTreeConfig",
    "merge", "stream_coreset", "build_separable_set", "find_intersection", "lower_bound_demo",
    "ratio_simple_sweep", "regularized_ratio_sweep",
]

"""Univariate density estimation with piecewise-constant and piecewise-polynomial fits.

The estimator has three levels:

1. a greedy interval-merging loop that finds a good partition of the domain,
2. a per-interval projection that fits the best nonnegative polynomial in
   Ak-distance to the empirical distribution, solved as a convex feasibility
   problem with a cutting-plane method,
3. a combinatorial separation oracle built on an exact solver for the
   discrete Ak problem (maximum-scoring disjoint segment sets).

`bench` adds synthetic mixture densities and a sweep harness that measures
L1 error and fit time against known ground truth.
"""

from .intervals import Interval, IntervalPartition
from .empirical import EmpiricalDistribution, build_empirical, initial_partition, flatten, a1_error
from .poly import Polynomial, AffineMap, coeff_bound, rescale_to_canonical
from .roots import RootReport, truncate, approx_real_roots, test_nonneg
from .aknorm import IntervalSelection, discrete_ak, brute_force_ak, build_discrete_sequence, compute_ak
from .projection import (
    FeasibilityParams,
    SepResult,
    sep_oracle,
    ak_separator,
    cutting_plane_solve,
    find_polynomial,
    projection_oracle,
    computation_oracle,
)
from .merging import (
    MergeConfig,
    PiecewiseHypothesis,
    HypothesisPiece,
    HistogramOracles,
    PolynomialOracles,
    FunctionOraclePair,
    construct_histogram,
    general_merging,
    required_samples,
)
from .discrete import discrete_flatten, prefix_power_sum, discrete_test_nonneg

__all__ = [
    "Interval",
    "IntervalPartition",
    "EmpiricalDistribution",
    "build_empirical",
    "initial_partition",
    "flatten",
    "a1_error",
    "Polynomial",
    "AffineMap",
    "coeff_bound",
    "rescale_to_canonical",
    "RootReport",
    "truncate",
    "approx_real_roots",
    "test_nonneg",
    "IntervalSelection",
    "discrete_ak",
    "brute_force_ak",
    "build_discrete_sequence",
    "compute_ak",
    "FeasibilityParams",
    "SepResult",
    "sep_oracle",
    "ak_separator",
    "cutting_plane_solve",
    "find_polynomial",
    "projection_oracle",
    "computation_oracle",
    "MergeConfig",
    "PiecewiseHypothesis",
    "HypothesisPiece",
    "HistogramOracles",
    "PolynomialOracles",
    "FunctionOraclePair",
    "construct_histogram",
    "general_merging",
    "required_samples",
    "discrete_flatten",
    "prefix_power_sum",
    "discrete_test_nonneg",
]

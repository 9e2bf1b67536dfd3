"""Inequality of attributes in a population moving among communities.

Fits a piecewise homogeneous Markov chain (with change-point detection) to
community trajectories, models community-conditional attributes with
histograms joined by a copula, and estimates the expected Theil entropy of the
attribute shares by Monte Carlo.
"""

from .changepoint import (
    ChangePointQuery,
    ChangePointResult,
    detect_change_points,
    lambda_statistic,
    segment_loglik,
)
from .copula import CopulaSpec, conditional_inverse, sample_dependent_uniforms
from .empirical import DistributionFamily, EmpiricalDistribution, cdf, fit_family, quantile
from .engine import (
    SimulationConfig,
    estimate_entropy,
    run_replication,
    shares_from_attributes,
    theil_entropy,
)
from .markov import (
    count_transitions,
    estimate_transition_matrix,
    simulate_phmc,
    simulate_step,
    stationary_distribution,
)
from .model import (
    AttributeObservations,
    CommunityTrajectories,
    EntropyTrajectory,
    SegmentedChain,
    TransitionMatrix,
    validate_trajectories,
)

__version__ = "0.1.0"

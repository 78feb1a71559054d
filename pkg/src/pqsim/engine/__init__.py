"""Trajectory sampling and Monte Carlo estimation for partitioned systems."""

from .decomposition import ExplicitDecomposition, decompose
from .estimator import EstimatorResult, build_propagators, estimate, estimate_purity, run_trajectory
from .propagators import KrylovPropagator, SpectralPropagator, TrotterPropagator
from .sampling import BRA, KET, Jump, Trajectory, sample_dyson, sample_trajectory, trajectory_rng

__all__ = [
    "BRA",
    "KET",
    "EstimatorResult",
    "ExplicitDecomposition",
    "Jump",
    "KrylovPropagator",
    "SpectralPropagator",
    "Trajectory",
    "TrotterPropagator",
    "build_propagators",
    "decompose",
    "estimate",
    "estimate_purity",
    "run_trajectory",
    "sample_dyson",
    "sample_trajectory",
    "trajectory_rng",
]

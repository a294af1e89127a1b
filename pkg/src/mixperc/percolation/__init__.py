"""Bond percolation on triangular, square, honeycomb and fcc lattices."""

from .engine import (
    ClusterStats,
    Estimate,
    ThresholdEstimate,
    bond_uniforms,
    cluster_stats,
    connection_probabilities,
    connection_probability,
    critical_occupation,
    critical_occupations,
    crossing_probability,
    estimate_threshold,
    run_trials,
    sample_occupancy,
    trial_rng,
)
from .lattice import THRESHOLDS, Boundary, Kind, LatticeGraph, LatticeSpec, build_lattice
from .unionfind import ANY_AXIS, UnionFind

__all__ = [
    "ANY_AXIS",
    "Boundary",
    "ClusterStats",
    "Estimate",
    "Kind",
    "LatticeGraph",
    "LatticeSpec",
    "THRESHOLDS",
    "ThresholdEstimate",
    "UnionFind",
    "bond_uniforms",
    "build_lattice",
    "cluster_stats",
    "connection_probabilities",
    "connection_probability",
    "critical_occupation",
    "critical_occupations",
    "crossing_probability",
    "estimate_threshold",
    "run_trials",
    "sample_occupancy",
    "trial_rng",
]

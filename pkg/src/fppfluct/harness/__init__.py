"""Experiment orchestration: configs, replica runners, statistics, reports."""

from .config import ExperimentConfig, load_config
from .experiments import (
    EXPERIMENTS,
    calibrate_a,
    confinement_experiment,
    gauss_check,
    growth_vs_dijkstra,
    min_cylinder_experiment,
    partition_heights,
    run_replicas,
    simulate,
    torus_moment_experiment,
)
from .report import ExperimentReport
from .seeds import replica_rng, replica_seed
from .stats import bootstrap_slope_ci, central_moment, exponent_fit, fluctuation_estimate

__all__ = [
    "EXPERIMENTS", "ExperimentConfig", "ExperimentReport", "bootstrap_slope_ci", "calibrate_a", "central_moment",
    "confinement_experiment", "exponent_fit", "fluctuation_estimate", "gauss_check", "growth_vs_dijkstra",
    "load_config", "min_cylinder_experiment", "partition_heights", "replica_rng", "replica_seed", "run_replicas",
    "simulate", "torus_moment_experiment",
]

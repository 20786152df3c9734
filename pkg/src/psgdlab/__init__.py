"""Projected SGD generalization laboratory.

Monte Carlo experiments and closed-form bound calculators for projected
stochastic gradient descent on smooth convex losses over compact convex
sets: generalization error vs iteration count, 1/sqrt(n) scaling, and
the dimension-dependent lower-bound construction.
"""

from .bounds import (
    BoundReport,
    covering_constants,
    covering_log_map,
    covering_number_bound,
    dudley_discrete_bound,
    dudley_gradient_concentration,
    dudley_integral_bound,
    inexact_bound,
    largest_dyadic_index,
    log_covering_number_bound,
    main_theorem_bound,
    opt_error_bound,
    stability_bound,
    strongly_convex_bound,
)
from .estimators import (
    Estimate,
    SupSearchConfig,
    check_delta_at_w,
    check_increment_tail,
    estimate_delta,
    estimate_delta_mean,
    estimate_gen_error,
    event_I_probability,
    fit_loglog_slope,
    gen_error_at_minimizer,
    gen_error_experiment,
    perturbed_minimizer_limit_check,
)
from .geometry import Ball, Box, ConvexSet, check_projection_lemma, project
from .losses import (
    CounterexampleLoss,
    Dataset,
    LossDataMismatchError,
    LossModel,
    OneSidedQuadraticLoss,
    PerturbedCounterexampleLoss,
    QuadraticLoss,
    counterexample_minimizer,
    counterexample_population_risk,
    detect_event_I,
    estimate_sigma_star,
    sample_labeled_dataset,
    sample_rademacher_dataset,
)
from .numerics import RngStream, as_vector, dot, euclidean_norm
from .optimizer import (
    GaussianNoise,
    MinibatchNoise,
    NoiseModel,
    NoNoise,
    PSGD,
    PerturbationBoundError,
    PerturbationSpec,
    StepSchedule,
    Trajectory,
    psgd_step,
    run_perturbed_psgd,
    run_psgd,
)

__version__ = "0.1.0"

__all__ = [
    "BoundReport", "covering_constants", "covering_log_map",
    "covering_number_bound", "dudley_discrete_bound",
    "dudley_gradient_concentration", "dudley_integral_bound",
    "inexact_bound", "largest_dyadic_index", "log_covering_number_bound",
    "main_theorem_bound", "opt_error_bound", "stability_bound",
    "strongly_convex_bound",
    "Estimate", "SupSearchConfig", "check_delta_at_w",
    "check_increment_tail", "estimate_delta", "estimate_delta_mean",
    "estimate_gen_error", "event_I_probability", "fit_loglog_slope",
    "gen_error_at_minimizer", "gen_error_experiment",
    "perturbed_minimizer_limit_check",
    "Ball", "Box", "ConvexSet", "check_projection_lemma", "project",
    "CounterexampleLoss", "Dataset", "LossDataMismatchError", "LossModel",
    "OneSidedQuadraticLoss", "PerturbedCounterexampleLoss", "QuadraticLoss",
    "counterexample_minimizer", "counterexample_population_risk",
    "detect_event_I", "estimate_sigma_star", "sample_labeled_dataset",
    "sample_rademacher_dataset",
    "RngStream", "as_vector", "dot", "euclidean_norm",
    "GaussianNoise", "MinibatchNoise", "NoiseModel", "NoNoise", "PSGD",
    "PerturbationBoundError", "PerturbationSpec", "StepSchedule",
    "Trajectory", "psgd_step", "run_perturbed_psgd", "run_psgd",
]

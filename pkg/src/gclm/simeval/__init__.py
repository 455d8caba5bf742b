"""Simulation, evaluation and stability selection."""
from .metrics import Confusion, EvalReport, confusion, evaluate_path, pr_points, roc_points
from .simulate import DriftPair, GenConfig, generate_model, marginal_scenario, sample_gaussian, simulate_dataset, standardize
from .stability import StabilityResult, select_on_split, stability_select
from .study import METHODS, run_method, run_replicate, run_study, summarize

__all__ = [
    "Confusion",
    "EvalReport",
    "confusion",
    "evaluate_path",
    "pr_points",
    "roc_points",
    "DriftPair",
    "GenConfig",
    "generate_model",
    "marginal_scenario",
    "sample_gaussian",
    "simulate_dataset",
    "standardize",
    "StabilityResult",
    "select_on_split",
    "stability_select",
    "METHODS",
    "run_method",
    "run_replicate",
    "run_study",
    "summarize",
]

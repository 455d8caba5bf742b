"""Graphical continuous Lyapunov models: equilibrium covariances, graph
projection, sparse drift estimation and structure-recovery evaluation."""
from .errors import (
    ConvergenceFailure,
    DegenerateColumn,
    DimensionMismatch,
    GCLMError,
    LineSearchStall,
    MarginalNotUnique,
    NotPositiveDefinite,
    NumericalError,
    SingularLyapunov,
    ValidationError,
)
from .graph import MixedGraph, Trek, compatibility_graph, marginalize, project_graph, trek_exists
from .loss import FrobeniusSquared, GaussianNegLogLik, grad_BC, make_loss
from .lyapunov import is_stable, kron_solve, schur_decompose, solve_lyapunov
from .optimizer import FitConfig, FitPath, FitResult, PRESETS, fit_path, mle_refit, preset, prox_grad_fit
from .baselines import cov_threshold_path, direct_lasso, direct_lasso_path

__version__ = "0.1.0"

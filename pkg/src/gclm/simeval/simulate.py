"""Random GCLM generation, equilibrium sampling and the marginalized scenario."""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import DegenerateColumn, ValidationError
from ..graph import compatibility_graph, project_graph
from ..lyapunov import cholesky, solve_lyapunov

__all__ = [
    "GenConfig",
    "DriftPair",
    "generate_model",
    "sample_gaussian",
    "standardize",
    "marginal_scenario",
    "simulate_dataset",
]


@dataclass(frozen=True)
class GenConfig:
    """Model size ``p``, edge probability ``d``, seed and sample size ``n_samples``."""

    p: int
    d: float
    seed: int = 0
    n_samples: int = 1000

    def __post_init__(self):
        if self.p < 1:
            raise ValidationError("p must be positive")
        if not 0.0 <= self.d <= 1.0:
            raise ValidationError("edge probability d must lie in [0, 1]")
        if self.n_samples < 2:
            raise ValidationError("need at least two samples")

    @classmethod
    def from_density(cls, p, k, seed=0, n_samples=1000):
        """Edge probability ``k / p`` (expected ``k`` parents per node)."""
        return cls(p=p, d=min(1.0, k / p), seed=seed, n_samples=n_samples)


@dataclass
class DriftPair:
    B: np.ndarray
    C: np.ndarray

    @cached_property
    def graph(self):
        return compatibility_graph(self.B, self.C)

    @cached_property
    def Sigma(self):
        return solve_lyapunov(self.B, self.C)

    @property
    def p(self):
        return self.B.shape[0]

    @property
    def support(self):
        mask = self.B != 0
        np.fill_diagonal(mask, False)
        return mask


def generate_model(config, rng=None):
    """Draw a random stable drift matrix and diagonal noise matrix.

    Off-diagonal ``B_ij = w_ij * e_ij`` with ``w_ij ~ Bernoulli(d)`` and
    ``e_ij ~ N(0, 1)``; ``B_ii = -sum_{j != i} |B_ij| - |e_ii|``, so every
    Gershgorin row disc lies in the open left half-plane.  ``C_ii ~ U(0, 1)``.
    """
    rng = np.random.default_rng(config.seed if rng is None else rng)
    p = config.p
    eps = rng.standard_normal((p, p))
    edges = rng.random((p, p)) < config.d
    np.fill_diagonal(edges, False)
    B = np.where(edges, eps, 0.0)
    np.fill_diagonal(B, -np.abs(B).sum(axis=1) - np.abs(np.diag(eps)))
    C = np.diag(rng.uniform(0.0, 1.0, size=p))
    return DriftPair(B=B, C=C)


def sample_gaussian(Sigma, n, seed=None):
    """``n`` i.i.d. rows from ``N(0, Sigma)`` via the Cholesky factor."""
    L = cholesky(Sigma)
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, L.shape[0]))
    return Z @ L.T


def standardize(data):
    """Empirical correlation matrix of the columns of ``data`` (unit diagonal exactly)."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("need a 2-d data matrix with at least two rows")
    X = X - X.mean(axis=0)
    sd = np.sqrt(np.sum(X**2, axis=0))
    bad = np.flatnonzero(sd == 0)
    if bad.size:
        raise DegenerateColumn(f"column(s) {bad.tolist()} have zero variance")
    X = X / sd
    R = X.T @ X
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 1.0)
    return R


def marginal_scenario(config, keep=10, rng=None):
    """Sample the full model and observe only the first ``keep`` coordinates.

    Returns ``(data, truth, model)`` where ``truth`` is the drift support of
    the projected graph on the kept vertices (directed edges among kept
    vertices are those of the full graph).
    """
    if not 1 <= keep <= config.p:
        raise ValidationError(f"keep must be in 1..{config.p}")
    rng = np.random.default_rng(config.seed if rng is None else rng)
    model = generate_model(config, rng=rng)
    data = sample_gaussian(model.Sigma, config.n_samples, seed=rng)[:, :keep]
    truth = project_graph(model.graph, keep).drift_support()
    np.fill_diagonal(truth, False)
    return data, truth, model


def simulate_dataset(config, rng=None):
    """Fully observed dataset: ``(data, truth, model)`` with ``truth`` the drift support."""
    return marginal_scenario(config, keep=config.p, rng=rng)

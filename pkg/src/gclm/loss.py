"""Covariance losses and their gradients through the Lyapunov map.

Gradients follow the entrywise convention ``G[i, j] = dL / dX[i, j]`` with all
entries treated as free, so ``<G, dX>`` is the first-order change of ``L``.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ValidationError
from .lyapunov import as_symmetric, cholesky, schur_decompose, solve_lyapunov

__all__ = [
    "GaussianNegLogLik",
    "FrobeniusSquared",
    "make_loss",
    "loss_value",
    "loss_grad_sigma",
    "LossGradient",
    "grad_BC",
]


class GaussianNegLogLik:
    """``log det Sigma + tr(target @ inv(Sigma))``, additive constants dropped."""

    name = "mloglik"

    def __init__(self, target):
        self.target = as_symmetric(target, "target")

    def value(self, Sigma):
        L = cholesky(Sigma)
        logdet = 2.0 * np.log(np.diag(L)).sum()
        W = scipy.linalg.solve_triangular(L, self.target, lower=True)
        W = scipy.linalg.solve_triangular(L, W.T, lower=True)
        # tr(L^-1 S L^-T) = tr(S Sigma^-1)
        return float(logdet + np.trace(W))

    def grad(self, Sigma):
        L = cholesky(Sigma)
        inv = scipy.linalg.cho_solve((L, True), np.eye(L.shape[0]))
        G = inv - inv @ self.target @ inv
        return 0.5 * (G + G.T)


class FrobeniusSquared:
    """``sum_ij (Sigma_ij - target_ij)**2``."""

    name = "frob"

    def __init__(self, target):
        self.target = as_symmetric(target, "target")

    def value(self, Sigma):
        return float(np.sum((Sigma - self.target) ** 2))

    def grad(self, Sigma):
        G = 2.0 * (Sigma - self.target)
        return 0.5 * (G + G.T)


_LOSSES = {"mloglik": GaussianNegLogLik, "frob": FrobeniusSquared}


def make_loss(kind, target):
    """Build a loss by name (``"mloglik"`` or ``"frob"``)."""
    try:
        return _LOSSES[kind](target)
    except KeyError:
        raise ValidationError(f"unknown loss {kind!r}; expected one of {sorted(_LOSSES)}") from None


def loss_value(loss, Sigma):
    return loss.value(Sigma)


def loss_grad_sigma(loss, Sigma):
    return loss.grad(Sigma)


@dataclass
class LossGradient:
    value: float
    Sigma: np.ndarray
    grad_sigma: np.ndarray
    grad_B: np.ndarray
    grad_C: np.ndarray

    @property
    def grad_C_diag(self):
        return np.diag(self.grad_C).copy()


def grad_BC(B, C, loss, schur=None):
    """Value and gradient of ``L(Sigma(B, C))`` with respect to ``B`` and ``C``.

    One adjoint solve ``B' D + D B + grad L = 0`` gives both gradients:
    ``dL/dB = 2 D Sigma`` and ``dL/dC = D``.  The Schur factors of ``B`` are
    shared between the forward and adjoint solves.
    """
    if schur is None:
        schur = schur_decompose(B)
    Sigma = solve_lyapunov(B, C, schur=schur)
    value = loss.value(Sigma)
    G = loss.grad(Sigma)
    D = solve_lyapunov(B, G, schur=schur, transpose=True)
    return LossGradient(value=value, Sigma=Sigma, grad_sigma=G, grad_B=2.0 * D @ Sigma, grad_C=D)

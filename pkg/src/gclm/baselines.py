"""Competing structure-recovery methods: the direct lasso path and covariance thresholding."""
from dataclasses import dataclass, field
import warnings

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import enet_path

from .lyapunov import as_symmetric
from .errors import ValidationError

__all__ = [
    "LassoFit",
    "SupportPath",
    "lasso_objective",
    "lasso_gradient",
    "lasso_lambda_max",
    "diagonal_lasso_start",
    "direct_lasso",
    "lasso_design",
    "kkt_violation",
    "direct_lasso_path",
    "cov_threshold_path",
]


@dataclass
class LassoFit:
    lam: float
    B: np.ndarray
    objective: float
    residual: float
    converged: bool

    @property
    def support(self):
        mask = self.B != 0
        np.fill_diagonal(mask, False)
        return mask


@dataclass
class SupportPath:
    """Sequence of supports indexed by a sparsity parameter.

    ``supports[k][i, j]`` marks a selected ``B[i, j]`` (edge ``j -> i``);
    undirected methods produce symmetric masks, i.e. both directions.
    """

    params: np.ndarray
    supports: list
    scores: np.ndarray = None
    fits: list = field(default_factory=list)


def _check_inputs(S, C):
    S = as_symmetric(S, "Sigma_hat")
    p = S.shape[0]
    C = np.eye(p) if C is None else as_symmetric(C, "C")
    if C.shape != S.shape:
        raise ValidationError("C and Sigma_hat must have the same shape")
    return S, C


def _penalty_weights(p, penalize_diagonal):
    w = np.ones((p, p))
    if not penalize_diagonal:
        np.fill_diagonal(w, 0.0)
    return w


def lasso_objective(B, S, C, lam, penalize_diagonal=False):
    """``||B S + S B' + C||_F^2 + lam * (l1 norm of the penalized entries of B)``."""
    R = B @ S + S @ B.T + C
    w = _penalty_weights(B.shape[0], penalize_diagonal)
    return float(np.sum(R**2) + lam * np.sum(w * np.abs(B)))


def lasso_gradient(B, S, C):
    """Gradient of the smooth part, ``4 R S`` with ``R = B S + S B' + C``."""
    R = B @ S + S @ B.T + C
    return 4.0 * R @ S


def diagonal_lasso_start(S, C):
    """Least-squares diagonal ``B`` for the residual ``||B S + S B + C||_F``."""
    p = S.shape[0]
    # (D S + S D)_kl = d_k S_kl + d_l S_kl
    A = np.zeros((p * p, p))
    for k in range(p):
        for l in range(p):
            A[k * p + l, k] += S[k, l]
            A[k * p + l, l] += S[k, l]
    d, *_ = np.linalg.lstsq(A, -C.ravel(), rcond=None)
    return np.diag(d)


def lasso_lambda_max(S, C=None, penalize_diagonal=False):
    """Smallest ``lam`` at which the solution is diagonal (or zero if the diagonal is penalized)."""
    S, C = _check_inputs(S, C)
    p = S.shape[0]
    if penalize_diagonal:
        return float(np.abs(lasso_gradient(np.zeros((p, p)), S, C)).max())
    G = lasso_gradient(diagonal_lasso_start(S, C), S, C)
    np.fill_diagonal(G, 0.0)
    return float(np.abs(G).max())


def lasso_design(S):
    """Design matrix of the residual map: column ``i*p + j`` is ``vec(E_ij S + S E_ji)``."""
    p = S.shape[0]
    X = np.zeros((p, p, p, p))
    for i in range(p):
        for j in range(p):
            X[i, :, i, j] += S[j, :]
            X[:, i, i, j] += S[:, j]
    return X.reshape(p * p, p * p)


def kkt_violation(B, S, C, lam, penalize_diagonal=False):
    """Largest violation of the lasso optimality conditions at ``B``."""
    G = lasso_gradient(B, S, C)
    w = _penalty_weights(B.shape[0], penalize_diagonal)
    nonzero = np.abs(G + lam * w * np.sign(B))
    zero = np.maximum(np.abs(G) - lam * w, 0.0)
    return float(np.where(B != 0, nonzero, zero).max())


def _fit_record(B, S, C, lam, penalize_diagonal, kkt_tol):
    R = B @ S + S @ B.T + C
    resid = float(np.sum(R**2))
    w = _penalty_weights(B.shape[0], penalize_diagonal)
    obj = resid + lam * float(np.sum(w * np.abs(B)))
    scale = max(1.0, np.abs(S).max() * np.abs(C).max())
    ok = kkt_violation(B, S, C, lam, penalize_diagonal) <= kkt_tol * scale
    return LassoFit(lam=float(lam), B=B, objective=obj, residual=resid, converged=ok)


def direct_lasso_path(
    S, lambdas=None, C=None, penalize_diagonal=False, n_lambda=100, min_ratio=1e-4, tol=1e-10, max_iter=100000,
    kkt_tol=1e-6,
):
    """Direct lasso solutions over a grid of penalties.

    Minimizes ``||B S + S B' + C||_F^2 + lam * rho(B)`` for each ``lam``,
    penalizing only off-diagonal entries unless ``penalize_diagonal``.  The
    unpenalized diagonal is profiled out by projecting onto the orthogonal
    complement of its columns, leaving a plain lasso over the off-diagonal
    entries that is solved by warm-started coordinate descent from the
    sparse end of the grid.  The default grid is log-regular from
    ``min_ratio * lambda_max`` to ``lambda_max``.  Fits are returned in
    increasing ``lam`` order; ``converged`` reports whether the KKT
    conditions hold to ``kkt_tol``.
    """
    S, C = _check_inputs(S, C)
    p = S.shape[0]
    lam_max = lasso_lambda_max(S, C, penalize_diagonal)
    if lambdas is None:
        lambdas = np.geomspace(lam_max * min_ratio, lam_max, n_lambda) if lam_max > 0 else np.zeros(1)
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(lambdas < 0):
        raise ValidationError("lambdas must be non-negative")
    lambdas = np.sort(lambdas)

    X = lasso_design(S)
    y = -C.ravel()
    flat_diag = np.zeros(p * p, dtype=bool)
    flat_diag[:: p + 1] = True
    pen = np.ones(p * p, dtype=bool) if penalize_diagonal else ~flat_diag
    free = ~pen
    if free.any():
        Q, _ = np.linalg.qr(X[:, free])
        Xp = X[:, pen] - Q @ (Q.T @ X[:, pen])
        yp = y - Q @ (Q.T @ y)
    else:
        Xp, yp = X, y

    def assemble(coef_pen):
        beta = np.zeros(p * p)
        beta[pen] = coef_pen
        if free.any():
            beta[free] = np.linalg.lstsq(X[:, free], y - X[:, pen] @ coef_pen, rcond=None)[0]
        return beta.reshape(p, p)

    fits = {}
    positive = lambdas[lambdas > 0]
    if positive.size:
        n = X.shape[0]
        # sklearn scales the squared loss by 1 / (2 n)
        alphas = positive[::-1] / (2.0 * n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            _, coefs, _ = enet_path(Xp, yp, l1_ratio=1.0, alphas=alphas, tol=tol, max_iter=max_iter, precompute=True)
        for k, lam in enumerate(positive[::-1]):
            # at or above lam_max zero is optimal; avoid round-off survivors
            coef = np.zeros(coefs.shape[0]) if lam >= lam_max else coefs[:, k]
            fits[lam] = _fit_record(assemble(coef), S, C, lam, penalize_diagonal, kkt_tol)
    if np.any(lambdas == 0):
        beta = np.linalg.lstsq(X, y, rcond=None)[0]
        fits[0.0] = _fit_record(beta.reshape(p, p), S, C, 0.0, penalize_diagonal, kkt_tol)
    ordered = [fits[lam] for lam in lambdas]
    return SupportPath(params=lambdas, supports=[f.support for f in ordered], fits=ordered)


def direct_lasso(S, lam, C=None, penalize_diagonal=False, **kwargs):
    """Single-penalty direct lasso fit (see :func:`direct_lasso_path`)."""
    return direct_lasso_path(S, [lam], C=C, penalize_diagonal=penalize_diagonal, **kwargs).fits[0]


def cov_threshold_path(S):
    """Supports from thresholding ``|S_ij|`` at each distinct off-diagonal magnitude.

    Thresholds run upward from 0; the support at ``t`` is ``{|S_ij| > t}``
    (symmetric, so each undirected pair counts in both directions).
    """
    S = as_symmetric(S, "Sigma_hat")
    mags = np.abs(S)
    np.fill_diagonal(mags, 0.0)
    iu = np.triu_indices(S.shape[0], k=1)
    thresholds = np.unique(np.concatenate([[0.0], mags[iu]]))
    supports = []
    for t in thresholds:
        mask = mags > t
        np.fill_diagonal(mask, False)
        supports.append(mask)
    return SupportPath(params=thresholds, supports=supports, scores=mags)

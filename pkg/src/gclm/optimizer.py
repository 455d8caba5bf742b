"""Proximal-gradient estimation of sparse drift matrices.

Minimizes ``L(Sigma(B, C)) + lam * sum_{i != j} |B_ij| + kappa * ||C - I||_F^2``
over stable ``B`` and positive diagonal ``C``.  ``kappa = inf`` freezes ``C``
at the identity.
"""
from dataclasses import dataclass, field, replace
import logging
import math

import numpy as np

from .errors import LineSearchStall, NumericalError, ValidationError
from .loss import make_loss
from .lyapunov import as_symmetric, is_stable, schur_decompose, solve_lyapunov

__all__ = [
    "FitConfig",
    "FitResult",
    "FitPath",
    "PRESETS",
    "preset",
    "soft_threshold_offdiag",
    "offdiag_l1",
    "support_of",
    "prox_grad_fit",
    "default_lambdas",
    "initial_drift",
    "fit_path",
    "mle_refit",
]

log = logging.getLogger(__name__)

LAMBDA_MAX = 6.0


@dataclass(frozen=True)
class FitConfig:
    """Settings for one run of the proximal-gradient fit.

    ``eps`` is compared against the per-iteration decrease of the penalized
    objective; with ``tol_mode="relative"`` the decrease is divided by
    ``max(1, |objective|)`` first.
    """

    lam: float = 0.0
    kappa: float = math.inf
    loss: str = "mloglik"
    eps: float = 1e-4
    max_iter: int = 100
    alpha: float = 0.5
    stability_tol: float = 1e-8
    max_halvings: int = 60
    min_step: float = 1e-12
    tol_mode: str = "absolute"

    def __post_init__(self):
        if self.lam < 0 or self.kappa < 0:
            raise ValidationError("lam and kappa must be non-negative")
        if not 0 < self.alpha < 1:
            raise ValidationError("alpha must lie in (0, 1)")
        if self.eps <= 0 or self.max_iter < 1:
            raise ValidationError("eps must be positive and max_iter at least 1")
        if self.tol_mode not in ("absolute", "relative"):
            raise ValidationError("tol_mode must be 'absolute' or 'relative'")


PRESETS = {
    "mloglik-inf": FitConfig(loss="mloglik", kappa=math.inf),
    "mloglik-0.01": FitConfig(loss="mloglik", kappa=0.01),
    "frob-inf": FitConfig(loss="frob", kappa=math.inf),
}


def preset(name, **overrides):
    try:
        base = PRESETS[name]
    except KeyError:
        raise ValidationError(f"unknown method preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(base, **overrides)


@dataclass
class FitResult:
    B: np.ndarray
    C: np.ndarray
    Sigma: np.ndarray
    objective: float
    loss: float
    iterations: int
    converged: bool
    lam: float = 0.0
    status: str = "converged"
    history: list = field(default_factory=list)

    @property
    def C_diag(self):
        return np.diag(self.C).copy()

    @property
    def support(self):
        return support_of(self.B)


@dataclass
class FitPath:
    lambdas: np.ndarray
    fits: list

    @property
    def supports(self):
        return [f.support for f in self.fits]


def soft_threshold_offdiag(B, t):
    """Soft-threshold the off-diagonal entries of ``B`` at level ``t``; keep the diagonal."""
    if t < 0:
        raise ValidationError("threshold must be non-negative")
    B = np.asarray(B, dtype=float)
    out = np.sign(B) * np.maximum(np.abs(B) - t, 0.0)
    np.fill_diagonal(out, np.diag(B))
    return out


def offdiag_l1(B):
    return float(np.abs(B).sum() - np.abs(np.diag(B)).sum())


def support_of(B):
    """Boolean mask of nonzero off-diagonal entries (``mask[i, j]`` means edge ``j -> i``)."""
    mask = np.asarray(B) != 0
    np.fill_diagonal(mask, False)
    return mask


def _anchor(c, kappa):
    if math.isinf(kappa):
        return 0.0
    return kappa * float(np.sum((c - 1.0) ** 2))


def _frozen_c(kappa):
    return math.isinf(kappa)


def _largest_step(test, max_halvings):
    u = 1.0
    for _ in range(max_halvings + 1):
        ok = test(u)
        if ok:
            return u, ok
        u *= 0.5
    return 0.0, None


def _converged(delta, objective, config):
    if config.tol_mode == "relative":
        delta = delta / max(1.0, abs(objective))
    return delta < config.eps


def prox_grad_fit(target, config=FitConfig(), B0=None, C0=None, support=None, callback=None, strict=False):
    """Proximal-gradient fit of ``(B, C)`` to a target covariance.

    Parameters
    ----------
    target : (p, p) array_like
        Sample covariance or correlation matrix.
    config : FitConfig
    B0 : (p, p) array_like, optional
        Stable starting drift; defaults to ``-inv(target) / 2``.
    C0 : (p,) array_like, optional
        Starting diagonal of ``C``; defaults to ones (forced to ones when
        ``kappa`` is infinite).
    support : (p, p) bool array, optional
        If given, off-diagonal entries outside ``support`` are pinned at zero
        and their gradient is masked.
    callback : callable, optional
        Called as ``callback(B, c, objective)`` for the initial point and
        every accepted iterate.
    strict : bool
        Raise :class:`LineSearchStall` instead of returning a flagged result.

    Returns
    -------
    FitResult
    """
    target = as_symmetric(target, "target")
    p = target.shape[0]
    loss = make_loss(config.loss, target)
    lam, kappa = config.lam, config.kappa
    frozen = _frozen_c(kappa)

    B = initial_drift(target) if B0 is None else np.array(B0, dtype=float)
    if B.shape != (p, p):
        raise ValidationError(f"B0 has shape {B.shape}, expected {(p, p)}")
    allowed = None
    if support is not None:
        allowed = np.array(support, dtype=bool)
        if allowed.shape != (p, p):
            raise ValidationError("support mask has the wrong shape")
        np.fill_diagonal(allowed, True)
        B = np.where(allowed, B, 0.0)
    c = np.ones(p) if (C0 is None or frozen) else np.array(C0, dtype=float)
    if np.any(c <= 0):
        raise ValidationError("C0 must have positive entries")

    schur = schur_decompose(B)
    if not is_stable(B, config.stability_tol, schur=schur):
        raise ValidationError("initial drift matrix B0 is not stable")
    Sigma = solve_lyapunov(B, np.diag(c), schur=schur)
    f = loss.value(Sigma) + _anchor(c, kappa)
    g = lam * offdiag_l1(B)
    history = [f + g]
    if callback is not None:
        callback(B, c, f + g)

    status = "max_iter"
    converged = False
    iterations = 0
    while iterations < config.max_iter:
        iterations += 1
        G = loss.grad(Sigma)
        D = solve_lyapunov(B, G, schur=schur, transpose=True)
        grad_B = 2.0 * D @ Sigma
        if allowed is not None:
            grad_B = np.where(allowed, grad_B, 0.0)
        if frozen:
            grad_c = np.zeros(p)
            t = 0.0
        else:
            grad_c = np.diag(D) + 2.0 * kappa * (c - 1.0)
            t, _ = _largest_step(lambda u: bool(np.all(c - u * grad_c > 0)), config.max_halvings)

        def stable_candidate(u):
            cand = soft_threshold_offdiag(B - u * grad_B, u * lam)
            sch = schur_decompose(cand)
            return (cand, sch) if is_stable(cand, config.stability_tol, schur=sch) else None

        r, first = _largest_step(stable_candidate, config.max_halvings)

        s = 1.0
        accepted = None
        while s >= config.min_step:
            if s == 1.0 and first is not None:
                B_new, schur_new = first
            else:
                B_new = soft_threshold_offdiag(B - s * r * grad_B, s * r * lam)
                schur_new = schur_decompose(B_new)
            c_new = c - s * t * grad_c
            if is_stable(B_new, config.stability_tol, schur=schur_new) and np.all(c_new > 0):
                Sigma_new = solve_lyapunov(B_new, np.diag(c_new), schur=schur_new)
                try:
                    f_new = loss.value(Sigma_new) + _anchor(c_new, kappa)
                except NumericalError:
                    f_new = math.inf
                g_new = lam * offdiag_l1(B_new)
                dB = B_new - B
                dc = c_new - c
                quad = (np.sum(dB**2) / r if r > 0 else 0.0) + (np.sum(dc**2) / t if t > 0 else 0.0)
                nu = quad / (2.0 * s) + np.sum(dB * grad_B) + np.sum(dc * grad_c)
                if f_new + g_new <= f + g and f_new <= f + nu:
                    accepted = (B_new, schur_new, c_new, Sigma_new, f_new, g_new)
                    break
            s *= config.alpha

        if accepted is None:
            status = "line_search_stall"
            if strict:
                raise LineSearchStall(f"line search step fell below {config.min_step} at iteration {iterations}")
            log.debug("line search stalled at iteration %d (lam=%g)", iterations, lam)
            break

        delta = f + g - accepted[4] - accepted[5]
        B, schur, c, Sigma, f, g = accepted
        history.append(f + g)
        if callback is not None:
            callback(B, c, f + g)
        if _converged(delta, f + g, config):
            status = "converged"
            converged = True
            break

    return FitResult(
        B=B,
        C=np.diag(c),
        Sigma=Sigma,
        objective=f + g,
        loss=f - _anchor(c, kappa),
        iterations=iterations,
        converged=converged,
        lam=lam,
        status=status,
        history=history,
    )


def initial_drift(target):
    """``-inv(target) / 2``, the symmetric stable drift with ``Sigma(B0, I) = target``."""
    target = as_symmetric(target, "target")
    return -0.5 * np.linalg.inv(target)


def default_lambdas(lambda_max=LAMBDA_MAX, n=100, min_ratio=1e-4):
    """Log-regular grid from ``lambda_max * min_ratio`` up to ``lambda_max``."""
    return np.geomspace(lambda_max * min_ratio, lambda_max, n)


def fit_path(target, lambdas=None, config=FitConfig(), B0=None, callback=None):
    """Regularization path by continuation over increasing ``lambdas``.

    Each fit starts from the previous solution, so the path moves from a
    dense estimate toward sparser ones.  A step that fails numerically keeps
    the previous iterate (flagged ``status="failed"``) and the path continues.
    ``callback`` is passed to every :func:`prox_grad_fit` call.
    """
    target = as_symmetric(target, "target")
    lambdas = default_lambdas() if lambdas is None else np.asarray(lambdas, dtype=float)
    if lambdas.ndim != 1 or lambdas.size == 0:
        raise ValidationError("lambdas must be a non-empty 1-d sequence")
    if np.any(np.diff(lambdas) <= 0):
        raise ValidationError("lambdas must be strictly increasing")
    B = initial_drift(target) if B0 is None else np.asarray(B0, dtype=float)
    c = None
    fits = []
    for lam in lambdas:
        cfg = replace(config, lam=float(lam))
        try:
            fit = prox_grad_fit(target, cfg, B0=B, C0=c, callback=callback)
        except NumericalError as exc:
            if not fits:
                raise
            log.warning("path step lam=%g failed: %s", lam, exc)
            prev = fits[-1]
            fit = replace(prev, lam=float(lam), converged=False, status="failed", history=[])
        fits.append(fit)
        B, c = fit.B, fit.C_diag
    return FitPath(lambdas=lambdas, fits=fits)


def mle_refit(target, support, config=FitConfig(), B0=None, C0=None):
    """Unpenalized fit restricted to a fixed off-diagonal support.

    ``support[i, j]`` permits a nonzero ``B[i, j]``; the diagonal is always
    free.  Starts from ``B0`` masked to the support when that is stable, else
    from ``-diag(1 / (2 * diag(target)))``.
    """
    target = as_symmetric(target, "target")
    support = np.array(support, dtype=bool)
    cfg = replace(config, lam=0.0)
    start = None
    if B0 is not None:
        allowed = support.copy()
        np.fill_diagonal(allowed, True)
        cand = np.where(allowed, np.asarray(B0, dtype=float), 0.0)
        if is_stable(cand, cfg.stability_tol):
            start = cand
    if start is None:
        start = np.diag(-0.5 / np.diag(target))
        C0 = None
    return prox_grad_fit(target, cfg, B0=start, C0=C0, support=support)

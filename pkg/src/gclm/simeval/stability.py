"""Stability selection by repeated random half-splits.

Each repetition fits a regularization path on one half of the data, refits
every distinct support by maximum likelihood, and keeps the support whose
refit has the highest Gaussian likelihood on the held-out half.
"""
from dataclasses import dataclass, field, replace
import logging

import numpy as np

from ..errors import NumericalError, ValidationError
from ..graph import MixedGraph
from ..loss import GaussianNegLogLik
from ..optimizer import default_lambdas, fit_path, mle_refit, preset
from .simulate import standardize
from .study import parallel_map

__all__ = ["StabilityResult", "select_on_split", "stability_select"]

log = logging.getLogger(__name__)


@dataclass
class StabilityResult:
    """Selection frequencies (``freq[i, j]`` for edge ``j -> i``) and the retained graph."""

    frequencies: np.ndarray
    graph: MixedGraph
    n_splits: int
    n_ok: int
    failed: list = field(default_factory=list)
    selected: list = field(default_factory=list)


def _distinct_supports(path):
    seen = {}
    for fit in path.fits:
        key = fit.support.tobytes()
        if key not in seen:
            seen[key] = fit
    return list(seen.values())


def select_on_split(fit_R, score_R, config, lambdas, tie_tol=1e-6, refit_eps=1e-6):
    """Path on ``fit_R``, ML refits of each distinct support, selection by likelihood on ``score_R``.

    Supports whose held-out negative log-likelihood is within ``tie_tol`` of
    the best are considered tied and the sparsest of them is returned.
    """
    path = fit_path(fit_R, lambdas, config)
    scorer = GaussianNegLogLik(score_R)
    refit_cfg = replace(config, eps=refit_eps, max_iter=max(config.max_iter, 1000))
    scored = []
    for fit in _distinct_supports(path):
        try:
            refit = mle_refit(fit_R, fit.support, refit_cfg, B0=fit.B, C0=fit.C_diag)
            scored.append((scorer.value(refit.Sigma), int(fit.support.sum()), fit.support))
        except NumericalError as exc:
            log.debug("refit failed for a support of size %d: %s", fit.support.sum(), exc)
    if not scored:
        raise NumericalError("no support could be refitted")
    best = min(s[0] for s in scored)
    tied = [s for s in scored if s[0] <= best + tie_tol * max(1.0, abs(best))]
    return min(tied, key=lambda s: s[1])[2]


def _split_task(args):
    data, seed, config, lambdas, fit_on, tie_tol, refit_eps = args
    rng = np.random.default_rng(seed)
    n = data.shape[0]
    perm = rng.permutation(n)
    half = n // 2
    train, test = data[perm[:half]], data[perm[half : 2 * half]]
    R_train, R_test = standardize(train), standardize(test)
    fit_R = R_train if fit_on == "train" else R_test
    try:
        return select_on_split(fit_R, R_test, config, lambdas, tie_tol, refit_eps)
    except NumericalError as exc:
        return exc


def stability_select(
    data,
    n_splits=200,
    retain=0.85,
    config=None,
    lambdas=None,
    seed=0,
    fit_on="train",
    tie_tol=1e-6,
    refit_eps=1e-6,
    jobs=None,
):
    """Edge selection frequencies over ``n_splits`` random half-splits.

    Parameters
    ----------
    data : (N, p) array_like
    retain : float
        Edges selected in at least this fraction of successful splits are
        kept in the returned graph (an edge must be selected at least once).
    config : FitConfig, optional
        Path settings; defaults to the ``mloglik-inf`` preset.
    fit_on : {"train", "test"}
        Half used for the path and refits.  Selection always scores on the
        test half.
    seed : int
        Master seed; split ``k`` uses the ``k``-th spawned child seed, so
        results do not depend on ``jobs``.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] < 4:
        raise ValidationError("stability selection needs a data matrix with at least 4 rows")
    if fit_on not in ("train", "test"):
        raise ValidationError("fit_on must be 'train' or 'test'")
    if not 0.0 <= retain <= 1.0:
        raise ValidationError("retain must lie in [0, 1]")
    config = preset("mloglik-inf") if config is None else config
    lambdas = default_lambdas() if lambdas is None else np.asarray(lambdas, dtype=float)
    seeds = np.random.SeedSequence(seed).spawn(n_splits)
    tasks = [(data, s, config, lambdas, fit_on, tie_tol, refit_eps) for s in seeds]
    results = parallel_map(_split_task, tasks, jobs)

    p = data.shape[1]
    counts = np.zeros((p, p))
    failed, selected = [], []
    for k, res in enumerate(results):
        if isinstance(res, Exception):
            failed.append((k, str(res)))
            continue
        counts += res
        selected.append(res)
    n_ok = len(selected)
    freq = counts / n_ok if n_ok else counts
    keep = (freq >= retain) & (counts > 0)
    np.fill_diagonal(keep, False)
    rows, cols = np.nonzero(keep)
    graph = MixedGraph(p, frozenset((int(j), int(i)) for i, j in zip(rows, cols)))
    return StabilityResult(frequencies=freq, graph=graph, n_splits=n_splits, n_ok=n_ok, failed=failed, selected=selected)

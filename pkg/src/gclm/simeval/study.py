"""Method runners and simulation replicates."""
from concurrent.futures import ProcessPoolExecutor
import os
import time

import numpy as np

from ..baselines import cov_threshold_path, direct_lasso_path
from ..errors import ValidationError
from ..optimizer import PRESETS, default_lambdas, fit_path, preset
from .metrics import evaluate_path
from .simulate import GenConfig, marginal_scenario, standardize

__all__ = ["METHODS", "run_method", "run_replicate", "run_study", "default_jobs", "parallel_map"]

METHODS = tuple(PRESETS) + ("lasso", "covthr")


def default_jobs():
    try:
        return max(1, int(os.environ.get("GCLM_JOBS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, tasks, jobs=None):
    """Ordered ``map`` over ``tasks``, in worker processes when ``jobs > 1``."""
    jobs = default_jobs() if jobs is None else jobs
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def run_method(method, R, lambdas=None, **overrides):
    """Run one named method on a correlation matrix; returns ``(supports, path)``."""
    if method in PRESETS:
        cfg = preset(method, **overrides)
        path = fit_path(R, default_lambdas() if lambdas is None else lambdas, cfg)
        return path.supports, path
    if method == "lasso":
        path = direct_lasso_path(R, lambdas)
        return path.supports, path
    if method == "covthr":
        path = cov_threshold_path(R)
        return path.supports, path
    raise ValidationError(f"unknown method {method!r}; choose from {list(METHODS)}")


def _replicate_task(args):
    config, methods, keep = args
    data, truth, _ = marginal_scenario(config, keep=keep)
    R = standardize(data)
    out = {}
    for method in methods:
        t0 = time.perf_counter()
        supports, _ = run_method(method, R)
        report = evaluate_path(supports, truth)
        out[method] = dict(report.to_dict(), seconds=time.perf_counter() - t0)
        out[method].pop("counts")
    return out


def run_replicate(p, k, n_samples, seed, methods=METHODS, keep=None):
    """Generate one model, sample, run ``methods`` and score them.

    Returns ``{method: metrics dict}`` (``maxacc``, ``maxf1``, ``auroc``,
    ``aupr``, ``seconds``).  With ``keep`` set, only the first ``keep``
    coordinates are observed and scored against the projected graph.
    """
    config = GenConfig.from_density(p, k, seed=seed, n_samples=n_samples)
    return _replicate_task((config, tuple(methods), config.p if keep is None else keep))


def run_study(ps, ks, seeds, n_samples=1000, methods=METHODS, keep=None, jobs=None):
    """Grid of replicates; returns a list of flat rows (one per replicate and method)."""
    grid = [(p, k, s) for p in ps for k in ks for s in seeds]
    tasks = [
        (GenConfig.from_density(p, k, seed=s, n_samples=n_samples), tuple(methods), p if keep is None else keep)
        for p, k, s in grid
    ]
    results = parallel_map(_replicate_task, tasks, jobs)
    rows = []
    for (p, k, s), res in zip(grid, results):
        for method, metrics in res.items():
            rows.append(dict(p=p, k=k, seed=s, method=method, **metrics))
    return rows


def summarize(rows, metrics=("maxacc", "maxf1", "auroc", "aupr", "seconds")):
    """Mean of each metric per ``(p, method)``, averaging over densities and seeds."""
    groups = {}
    for row in rows:
        groups.setdefault((row["p"], row["method"]), []).append(row)
    out = []
    for (p, method), members in sorted(groups.items()):
        entry = dict(p=p, method=method, n=len(members))
        for m in metrics:
            entry[m] = float(np.mean([r[m] for r in members]))
        out.append(entry)
    return out

"""Edge-recovery metrics over a path of estimated supports.

Recovery is scored as binary classification over the ``p(p-1)`` off-diagonal
positions of the drift matrix.
"""
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.integrate import trapezoid

from ..errors import DimensionMismatch
from ..graph import MixedGraph

__all__ = ["Confusion", "EvalReport", "confusion", "evaluate_path", "roc_points", "pr_points"]


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self):
        return (self.tp + self.tn) / self.total

    @property
    def f1(self):
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if self.tp else 0.0

    @property
    def tpr(self):
        pos = self.tp + self.fn
        return self.tp / pos if pos else 0.0

    @property
    def fpr(self):
        neg = self.fp + self.tn
        return self.fp / neg if neg else 0.0

    @property
    def precision(self):
        called = self.tp + self.fp
        return self.tp / called if called else 1.0


@dataclass
class EvalReport:
    maxacc: float
    maxf1: float
    auroc: float
    aupr: float
    best_acc_index: int
    best_f1_index: int
    counts: list = field(default_factory=list)

    def to_dict(self):
        out = asdict(self)
        out["counts"] = [asdict(c) for c in self.counts]
        return out


def _as_mask(x, p=None):
    if isinstance(x, MixedGraph):
        x = x.drift_support()
    mask = np.array(x, dtype=bool)
    if mask.ndim != 2 or mask.shape[0] != mask.shape[1]:
        raise DimensionMismatch(f"support must be a square boolean matrix, got shape {mask.shape}")
    if p is not None and mask.shape[0] != p:
        raise DimensionMismatch(f"support is {mask.shape[0]}x{mask.shape[0]} but truth has p={p}")
    return mask


def confusion(support, truth):
    """Confusion counts of one support against the truth, diagonal excluded."""
    off = ~np.eye(truth.shape[0], dtype=bool)
    s, t = support[off], truth[off]
    return Confusion(
        tp=int(np.sum(s & t)),
        fp=int(np.sum(s & ~t)),
        tn=int(np.sum(~s & ~t)),
        fn=int(np.sum(~s & t)),
    )


def roc_points(counts):
    """ROC operating points closed by (0, 0) and (1, 1), sorted by FPR.

    TPR is made non-decreasing by a running maximum, so a non-nested path
    yields the curve of its best available operating points.
    """
    pts = [(0.0, 0.0), (1.0, 1.0)] + [(c.fpr, c.tpr) for c in counts]
    pts.sort()
    fpr = np.array([x for x, _ in pts])
    tpr = np.maximum.accumulate(np.array([y for _, y in pts]))
    return fpr, tpr


def pr_points(counts):
    """Precision-recall points closed by the empty graph (0, 1) and the complete graph.

    The complete graph has recall 1 and precision equal to the edge
    prevalence.  Points are sorted by recall, then by decreasing precision.
    """
    c0 = counts[0]
    pos = c0.tp + c0.fn
    prevalence = pos / c0.total if c0.total else 0.0
    pts = [(0.0, 1.0), (1.0, prevalence)] + [(c.tpr, c.precision) for c in counts]
    pts.sort(key=lambda rp: (rp[0], -rp[1]))
    return np.array([r for r, _ in pts]), np.array([q for _, q in pts])


def evaluate_path(supports, truth):
    """Score a path of supports against the true drift support.

    Parameters
    ----------
    supports : sequence of (p, p) bool arrays
        ``supports[k][i, j]`` marks an estimated edge ``j -> i``; undirected
        estimates should be passed as symmetric masks.
    truth : (p, p) bool array or MixedGraph
        True drift support (or a graph whose directed part gives it).

    Returns
    -------
    EvalReport
        ``maxacc``/``maxf1`` ties go to the sparser path point.
    """
    truth = _as_mask(truth)
    np.fill_diagonal(truth, False)
    p = truth.shape[0]
    masks = [_as_mask(s, p) for s in supports]
    if not masks:
        raise DimensionMismatch("empty path")
    counts = [confusion(m, truth) for m in masks]

    sizes = np.array([c.tp + c.fp for c in counts])
    order = np.argsort(sizes, kind="stable")

    def best(metric):
        vals = np.array([metric(c) for c in counts])
        top = vals.max()
        idx = next(k for k in order if vals[k] == top)
        return float(top), int(idx)

    maxacc, acc_idx = best(lambda c: c.accuracy)
    maxf1, f1_idx = best(lambda c: c.f1)
    fpr, tpr = roc_points(counts)
    rec, prec = pr_points(counts)
    return EvalReport(
        maxacc=maxacc,
        maxf1=maxf1,
        auroc=float(trapezoid(tpr, fpr)),
        aupr=float(trapezoid(prec, rec)),
        best_acc_index=acc_idx,
        best_f1_index=f1_idx,
        counts=counts,
    )

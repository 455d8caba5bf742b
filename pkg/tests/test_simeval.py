import numpy as np
import pytest
from sklearn.metrics import auc, precision_recall_curve, roc_auc_score

from gclm.errors import DegenerateColumn, DimensionMismatch, NotPositiveDefinite, ValidationError
from gclm.graph import MixedGraph
from gclm.lyapunov import is_stable
from gclm.simeval import (
    GenConfig,
    evaluate_path,
    generate_model,
    marginal_scenario,
    roc_points,
    run_replicate,
    sample_gaussian,
    simulate_dataset,
    stability_select,
    standardize,
    summarize,
)
from gclm.simeval.metrics import confusion


def score_path(scores):
    """Nested supports from thresholding a score matrix at every distinct value."""
    off = ~np.eye(scores.shape[0], dtype=bool)
    levels = np.unique(scores[off])
    return [(scores >= t) & off for t in levels[::-1]] + [np.zeros_like(off)]


def test_generator_no_edges():
    m = generate_model(GenConfig(p=5, d=0.0, seed=1))
    assert np.array_equal(m.B, np.diag(np.diag(m.B)))
    assert np.all(np.diag(m.B) < 0) and is_stable(m.B)


def test_generator_full_two_node():
    m = generate_model(GenConfig(p=2, d=1.0, seed=2))
    assert m.support.sum() == 2
    assert np.all(np.diag(m.B) + np.abs(m.B - np.diag(np.diag(m.B))).sum(axis=1) < 0)
    assert np.all((np.diag(m.C) > 0) & (np.diag(m.C) < 1))


def test_generator_edge_frequency():
    rng = np.random.default_rng(0)
    edges = sum(generate_model(GenConfig(p=10, d=0.2), rng=rng).support.sum() for _ in range(1000))
    n = 1000 * 90
    assert abs(edges / n - 0.2) <= 3 * np.sqrt(0.2 * 0.8 / n)


def test_generator_always_stable():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        assert is_stable(generate_model(GenConfig(p=6, d=0.5), rng=rng).B)


def test_generator_deterministic():
    a = generate_model(GenConfig(p=7, d=0.3, seed=5))
    b = generate_model(GenConfig(p=7, d=0.3, seed=5))
    assert np.array_equal(a.B, b.B) and np.array_equal(a.C, b.C)
    with pytest.raises(ValidationError):
        GenConfig(p=3, d=1.5)


def test_sampling():
    X = sample_gaussian(np.eye(2), 100_000, seed=0)
    assert np.abs(np.cov(X.T) - np.eye(2)).max() <= 0.03
    assert sample_gaussian(np.eye(3), 1, seed=0).shape == (1, 3)
    assert np.array_equal(sample_gaussian(np.eye(3), 5, seed=9), sample_gaussian(np.eye(3), 5, seed=9))
    with pytest.raises(NotPositiveDefinite):
        sample_gaussian(np.diag([1.0, -1.0]), 5, seed=0)


def test_standardize():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(50)
    R = standardize(np.column_stack([x, 3 * x + 1]))
    assert R[0, 1] == pytest.approx(1.0)
    R = standardize(rng.standard_normal((20_000, 4)))
    assert np.array_equal(np.diag(R), np.ones(4))
    assert np.abs(R - np.eye(4)).max() <= 4 / np.sqrt(20_000)
    with pytest.raises(DegenerateColumn):
        standardize(np.column_stack([x, np.ones(50)]))


def test_metrics_exact_and_empty():
    truth = np.zeros((4, 4), dtype=bool)
    truth[1, 0] = truth[2, 1] = True
    rep = evaluate_path([np.zeros_like(truth), truth], truth)
    assert rep.maxacc == 1.0 and rep.maxf1 == 1.0 and rep.best_f1_index == 1
    rep = evaluate_path([np.zeros_like(truth)], MixedGraph(4, frozenset({(0, 1), (1, 2)})))
    assert rep.maxf1 == 0.0
    assert rep.maxacc == pytest.approx(1 - 2 / 12)
    assert sum(vars(rep.counts[0]).values()) == 12
    with pytest.raises(DimensionMismatch):
        evaluate_path([np.zeros((3, 3), dtype=bool)], truth)


def test_ties_go_to_sparser_point():
    truth = np.zeros((3, 3), dtype=bool)
    truth[1, 0] = True
    a = truth.copy()
    b = truth.copy()
    b[2, 0] = True
    b[0, 2] = True
    c = truth.copy()
    c[2, 1] = True
    # b and c have one extra false positive each relative to a sparser tie
    rep = evaluate_path([b, c, a], truth)
    assert rep.best_acc_index == 2


def test_auc_matches_sklearn_on_score_paths():
    rng = np.random.default_rng(4)
    off = ~np.eye(5, dtype=bool)
    for _ in range(50):
        truth = (rng.random((5, 5)) < 0.3) & off
        if not truth.any() or truth[off].all():
            continue
        scores = rng.random((5, 5)) + 0.8 * truth
        rep = evaluate_path(score_path(scores), truth)
        assert rep.auroc == pytest.approx(roc_auc_score(truth[off], scores[off]), abs=1e-12)
        prec, rec, _ = precision_recall_curve(truth[off], scores[off])
        assert rep.aupr == pytest.approx(auc(rec, prec), abs=1e-12)


def test_random_scores_auroc_null():
    rng = np.random.default_rng(5)
    off = ~np.eye(5, dtype=bool)
    vals = []
    for _ in range(10_000):
        truth = (rng.random((5, 5)) < 0.5) & off
        if not truth.any() or truth[off].all():
            continue
        vals.append(evaluate_path(score_path(rng.random((5, 5))), truth).auroc)
    assert abs(np.mean(vals) - 0.5) <= 0.02


def test_roc_points_monotone():
    rng = np.random.default_rng(6)
    truth = (rng.random((6, 6)) < 0.3) & ~np.eye(6, dtype=bool)
    sups = [(rng.random((6, 6)) < q) & ~np.eye(6, dtype=bool) for q in rng.random(10)]
    fpr, tpr = roc_points([confusion(s, truth) for s in sups])
    assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)
    assert (fpr[0], tpr[0]) == (0.0, 0.0) and (fpr[-1], tpr[-1]) == (1.0, 1.0)


def test_marginal_scenario_full_keep_matches_plain():
    cfg = GenConfig.from_density(10, 2, seed=8, n_samples=200)
    a, ta, _ = marginal_scenario(cfg, keep=10)
    b, tb, _ = simulate_dataset(cfg)
    assert np.array_equal(a, b) and np.array_equal(ta, tb)


def test_marginal_scenario_truncation():
    cfg = GenConfig.from_density(30, 2, seed=9, n_samples=20_000)
    data, truth, model = marginal_scenario(cfg, keep=10)
    assert data.shape == (20_000, 10) and truth.shape == (10, 10)
    S11 = model.Sigma[:10, :10]
    scale = np.sqrt(np.outer(np.diag(S11), np.diag(S11)))
    assert np.abs((np.cov(data.T) - S11) / scale).max() <= 4 / np.sqrt(20_000)
    sub = model.support[:10, :10]
    assert np.array_equal(truth, sub)


def test_marginal_scenario_keeps_full_model():
    cfg = GenConfig(p=12, d=0.3, seed=10, n_samples=50)
    rng = np.random.default_rng(cfg.seed)
    model = generate_model(cfg, rng=rng)
    _, truth, m2 = marginal_scenario(cfg, keep=10)
    assert np.array_equal(m2.B, model.B)
    assert np.array_equal(truth, model.support[:10, :10])


@pytest.fixture(scope="module")
def fork_data():
    from gclm.lyapunov import solve_lyapunov

    B = np.array([[-0.5, 0.0, 0.0], [1.0, -1.118034, 0.0], [1.0, 0.0, -1.118034]])
    return sample_gaussian(solve_lyapunov(B, np.eye(3)), 600, seed=1)


def test_stability_union_and_determinism(fork_data):
    lambdas = np.geomspace(6e-4, 6, 20)
    a = stability_select(fork_data, n_splits=4, retain=0.0, lambdas=lambdas, seed=3)
    b = stability_select(fork_data, n_splits=4, retain=0.0, lambdas=lambdas, seed=3, jobs=2)
    assert np.array_equal(a.frequencies, b.frequencies)
    union = np.logical_or.reduce(a.selected)
    np.fill_diagonal(union, False)
    assert np.array_equal(a.graph.drift_support(), union)
    assert a.n_ok == 4 and not a.failed


def test_stability_validation(fork_data):
    with pytest.raises(ValidationError):
        stability_select(fork_data[:3])
    with pytest.raises(ValidationError):
        stability_select(fork_data, fit_on="both")


def test_replicate_and_summary():
    out = run_replicate(6, 2, 300, seed=1, methods=("mloglik-inf", "lasso", "covthr"))
    for metrics in out.values():
        for key in ("maxacc", "maxf1", "auroc", "aupr"):
            assert 0.0 <= metrics[key] <= 1.0
    rows = [dict(p=6, k=2, seed=1, method=m, **v) for m, v in out.items()]
    assert {r["method"] for r in summarize(rows)} == set(out)

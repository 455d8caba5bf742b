"""Acceptance criteria; each test reports one pass/fail line in the terminal summary."""
import math
import time

import numpy as np

from gclm.graph import compatibility_graph, marginalize, project_graph, sigma_partial_series, trek_reachability
from gclm.loss import grad_BC, make_loss
from gclm.lyapunov import (
    is_positive_definite,
    is_stable,
    kron_solve,
    lyapunov_residual,
    matrix_exp,
    schur_decompose,
    solve_lyapunov,
)
from gclm.optimizer import default_lambdas, fit_path, preset, prox_grad_fit
from gclm.simeval import (
    METHODS,
    GenConfig,
    generate_model,
    run_study,
    sample_gaussian,
    simulate_dataset,
    stability_select,
    standardize,
    summarize,
)
from gclm.simeval.study import default_jobs

from conftest import FIVE_NODE_B, random_pd
from oracles import fd_gradient, jacobian_gradient, rel_err, simpson_sigma

FIVE_NODE_CTILDE = np.array([[1, 0, 0, 0.05], [0, 1, 0, 0.07], [0, 0, 1, 0.20], [0.05, 0.07, 0.20, 1.60]])
FIVE_NODE_EIGS = [-1.79, -0.60 + 0.69j, -0.60 - 0.69j, -0.50 + 0.87j, -0.50 - 0.87j]


def test_criterion_01_five_node_ctilde(acceptance):
    t0 = time.perf_counter()
    _, Ct, _ = marginalize(FIVE_NODE_B, np.eye(5), 4)
    err = np.abs(Ct - FIVE_NODE_CTILDE).max()
    dt = time.perf_counter() - t0
    ok = acceptance(err <= 0.005 and dt < 1, f"five-node Ctilde max error {err:.4f} (tol 0.005), {dt:.3f} s")
    assert ok


def test_criterion_02_five_node_eigenvalues(acceptance):
    t0 = time.perf_counter()
    ev = schur_decompose(FIVE_NODE_B).eigenvalues
    err = max(np.min(np.abs(ev - z)) for z in FIVE_NODE_EIGS)
    dt = time.perf_counter() - t0
    ok = acceptance(err <= 0.01 and len(ev) == 5 and dt < 1, f"eigenvalue max error {err:.4f} (tol 0.01), {dt:.3f} s")
    assert ok


def test_criterion_03_five_node_projection(acceptance):
    t0 = time.perf_counter()
    G = compatibility_graph(FIVE_NODE_B, np.eye(5))
    H = project_graph(G, 4)
    base = G.induced(range(4))
    added = {(i + 1, j + 1) for i, j in H.bidirected - base.bidirected}
    dt = time.perf_counter() - t0
    ok = added == {(1, 4), (2, 4), (3, 4)} and H.directed == base.directed and dt < 1
    assert acceptance(ok, f"added bidirected edges {sorted(added)}, directed edges kept: {H.directed == base.directed}, {dt:.3f} s")


def test_criterion_04_solver_oracle(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(404)
    worst_kron = worst_res = 0.0
    all_pd = True
    for _ in range(200):
        p = int(rng.integers(2, 16))
        B = generate_model(GenConfig.from_density(p, int(rng.integers(1, 5))), rng=rng).B
        C = random_pd(rng, p)
        S = solve_lyapunov(B, C)
        K = kron_solve(B, C)
        worst_kron = max(worst_kron, np.linalg.norm(S - K) / np.linalg.norm(K))
        worst_res = max(worst_res, np.linalg.norm(lyapunov_residual(B, S, C)) / np.linalg.norm(C))
        all_pd &= is_positive_definite(S)
    dt = time.perf_counter() - t0
    ok = worst_kron <= 1e-8 and worst_res <= 1e-9 and all_pd and dt < 30
    assert acceptance(ok, f"200 solves: vs Kronecker {worst_kron:.1e} (tol 1e-8), residual {worst_res:.1e} (tol 1e-9), all PD {all_pd}, {dt:.1f} s")


def test_criterion_05_gradients(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(505)
    worst_fd = worst_jac = 0.0
    for kind in ("mloglik", "frob"):
        for k in range(50):
            p = 2 + k % 5
            B = generate_model(GenConfig(p=p, d=0.5), rng=rng).B
            C = np.diag(rng.uniform(0.2, 1.0, p))
            loss = make_loss(kind, random_pd(rng, p) / p)
            g = grad_BC(B, C, loss)
            jB, jC = jacobian_gradient(B, C, loss)
            fB, fC = fd_gradient(B, C, loss)
            worst_jac = max(worst_jac, rel_err(g.grad_B, jB), rel_err(g.grad_C_diag, jC))
            worst_fd = max(worst_fd, rel_err(g.grad_B, fB), rel_err(g.grad_C_diag, fC))
    dt = time.perf_counter() - t0
    ok = worst_fd <= 1e-5 and worst_jac <= 1e-9 and dt < 60
    assert acceptance(ok, f"100 instances: vs finite differences {worst_fd:.1e} (tol 1e-5), vs Jacobian {worst_jac:.1e} (tol 1e-9), {dt:.1f} s")


def test_criterion_06_trek_series(acceptance):
    t0 = time.perf_counter()
    a, c, s = 0.7, 1.3, 2.5
    scalar = sigma_partial_series(np.array([[-a]]), np.array([[c]]), s, 40)[0, 0]
    err_scalar = abs(scalar - c * (1 - math.exp(-2 * a * s)) / (2 * a))

    s_max = 1.0
    while np.linalg.norm(matrix_exp(s_max * FIVE_NODE_B)) >= 1e-6:
        s_max *= 1.5
    err_quad = np.abs(simpson_sigma(FIVE_NODE_B, np.eye(5), s_max, n=6000) - solve_lyapunov(FIVE_NODE_B, np.eye(5))).max()

    rng = np.random.default_rng(606)
    worst_zero = 0.0
    zeros = 0
    for _ in range(100):
        p = int(rng.integers(3, 9))
        B = np.tril(rng.standard_normal((p, p)) * (rng.random((p, p)) < 0.3), -1)
        np.fill_diagonal(B, -np.abs(B).sum(axis=1) - rng.uniform(0.5, 1.5, p))
        C = np.diag(rng.uniform(0.2, 1.0, p))
        none = ~trek_reachability(compatibility_graph(B, C))
        if none.any():
            worst_zero = max(worst_zero, np.abs(solve_lyapunov(B, C)[none]).max())
            zeros += int(none.sum())
    dt = time.perf_counter() - t0
    ok = err_scalar <= 1e-10 and err_quad <= 1e-4 and worst_zero <= 1e-10 and zeros > 0 and dt < 60
    assert acceptance(
        ok,
        f"scalar series {err_scalar:.1e} (tol 1e-10), quadrature {err_quad:.1e} (tol 1e-4), "
        f"no-trek entries max {worst_zero:.1e} over {zeros} entries (tol 1e-10), {dt:.1f} s",
    )


def test_criterion_07_simulation_recovery(acceptance):
    t0 = time.perf_counter()
    methods = ("mloglik-inf", "mloglik-0.01", "lasso", "covthr")
    rows = run_study([10], [2], range(20), n_samples=1000, methods=methods, jobs=default_jobs())
    m = {r["method"]: r for r in summarize(rows)}
    inf, k01, lasso, cov = (m[k] for k in methods)
    dt = time.perf_counter() - t0
    ok = (
        inf["auroc"] > lasso["auroc"]
        and inf["auroc"] > cov["auroc"]
        and inf["aupr"] > lasso["aupr"]
        and inf["aupr"] > cov["aupr"]
        and k01["aupr"] >= inf["aupr"] - 0.02
        and dt < 15 * 60
    )
    detail = ", ".join(f"{k} auroc {m[k]['auroc']:.3f} aupr {m[k]['aupr']:.3f}" for k in methods)
    assert acceptance(ok, f"p=10 k=2 N=1000, 20 seeds: {detail}; {dt:.0f} s")


def test_criterion_08_marginalized_recovery(acceptance):
    t0 = time.perf_counter()
    rows = run_study([30], [2], range(20), n_samples=1000, methods=METHODS, keep=10, jobs=default_jobs())
    m = {r["method"]: r for r in summarize(rows)}
    complete = all(m[k]["n"] == 20 and all(np.isfinite(m[k][x]) for x in ("auroc", "aupr")) for k in METHODS)
    dt = time.perf_counter() - t0
    ok = complete and m["mloglik-inf"]["auroc"] >= m["lasso"]["auroc"] and m["mloglik-0.01"]["auroc"] >= m["lasso"]["auroc"]
    ok = ok and dt < 20 * 60
    detail = ", ".join(f"{k} {m[k]['auroc']:.3f}" for k in METHODS)
    assert acceptance(ok, f"p=30 keep=10, 20 seeds, all complete {complete}; mean auroc {detail}; {dt:.0f} s")


def test_criterion_09_algorithm_contract(acceptance):
    violations = []
    endpoint_ok = True
    info = []
    for seed in range(3):
        data, _, _ = simulate_dataset(GenConfig.from_density(10, 2, seed=seed, n_samples=1000))
        R = standardize(data)
        for name in ("mloglik-inf", "frob-inf", "mloglik-0.01"):
            cfg = preset(name)

            def check(B, c, obj, cfg=cfg):
                if not (is_stable(B, cfg.stability_tol) and np.all(c > 0)):
                    violations.append((seed, name, "iterate"))

            path = fit_path(R, default_lambdas(), cfg, callback=check)
            for fit in path.fits:
                if np.any(np.diff(fit.history) > 0):
                    violations.append((seed, name, fit.lam))
                if not np.array_equal(fit.C, np.diag(np.diag(fit.C))):
                    violations.append((seed, name, "C"))
            end = path.fits[-1]
            if math.isinf(cfg.kappa):
                endpoint_ok &= not end.support.any()
            else:
                info.append(int(end.support.sum()))
    ok = not violations and endpoint_ok
    assert acceptance(
        ok,
        f"3 datasets x 3 presets x 100 lambdas: monotonicity/stability/PD violations {len(violations)}, "
        f"kappa=inf endpoints diagonal {endpoint_ok} (kappa=0.01 endpoint edge counts {info}, not required)",
    )


def test_criterion_10_complexity(acceptance):
    t0 = time.perf_counter()

    def median_iteration(p):
        data, _, _ = simulate_dataset(GenConfig.from_density(p, 2, seed=0, n_samples=1000))
        R = standardize(data)
        ticks = []
        prox_grad_fit(R, preset("mloglik-inf", lam=0.05, max_iter=20, eps=1e-12), callback=lambda *a: ticks.append(time.perf_counter()))
        return float(np.median(np.diff(ticks)))

    small, large = median_iteration(25), median_iteration(100)
    ratio = large / small
    dt = time.perf_counter() - t0
    ok = ratio <= 40 and dt < 300
    assert acceptance(ok, f"median iteration {small * 1e3:.2f} ms (p=25) vs {large * 1e3:.2f} ms (p=100), ratio {ratio:.1f} (max 40), {dt:.1f} s")


def test_criterion_11_stability_selection(acceptance):
    t0 = time.perf_counter()
    # fork 1 -> 2, 1 -> 3 with unit equilibrium variances
    B = np.array([[-0.5, 0.0, 0.0], [1.0, -1.118034, 0.0], [1.0, 0.0, -1.118034]])
    data = sample_gaussian(solve_lyapunov(B, np.eye(3)), 5000, seed=0)
    res = stability_select(data, n_splits=200, seed=0)
    truth = (B != 0) & ~np.eye(3, dtype=bool)
    off = ~np.eye(3, dtype=bool)
    true_min = res.frequencies[truth].min()
    false_max = res.frequencies[off & ~truth].max()
    again = stability_select(data, n_splits=10, seed=0, jobs=2)
    deterministic = all(np.array_equal(a, b) for a, b in zip(again.selected, res.selected[:10]))
    dt = time.perf_counter() - t0
    ok = true_min >= 0.85 and false_max <= 0.15 and deterministic and res.n_ok == 200 and dt < 600
    assert acceptance(
        ok,
        f"N=5000, 200 splits: true edges min freq {true_min:.3f} (>= 0.85), non-edges max freq {false_max:.3f} (<= 0.15), "
        f"deterministic {deterministic}, {dt:.0f} s",
    )

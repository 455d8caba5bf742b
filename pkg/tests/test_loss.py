import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gclm.errors import NotPositiveDefinite, ValidationError
from gclm.loss import FrobeniusSquared, GaussianNegLogLik, grad_BC, loss_grad_sigma, loss_value, make_loss
from gclm.lyapunov import solve_lyapunov

from conftest import random_model, random_pd
from oracles import fd_gradient, jacobian_gradient, rel_err


def test_loss_values():
    S = np.array([[2.0, 0.3], [0.3, 1.0]])
    assert FrobeniusSquared(S).value(S) == 0.0
    assert GaussianNegLogLik(np.eye(3)).value(np.eye(3)) == pytest.approx(3.0)
    assert GaussianNegLogLik(np.eye(2)).value(2 * np.eye(2)) == pytest.approx(2 * np.log(2) + 1)
    assert loss_value(make_loss("frob", S), S + np.eye(2)) == pytest.approx(2.0)


def test_likelihood_needs_pd():
    with pytest.raises(NotPositiveDefinite):
        GaussianNegLogLik(np.eye(2)).value(np.diag([1.0, -1.0]))
    with pytest.raises(ValidationError):
        make_loss("huber", np.eye(2))


def test_grad_sigma_zero_at_target(rng):
    S = random_pd(rng, 4)
    for kind in ("mloglik", "frob"):
        np.testing.assert_allclose(loss_grad_sigma(make_loss(kind, S), S), 0.0, atol=1e-12)


@pytest.mark.parametrize("kind", ["mloglik", "frob"])
def test_grad_sigma_finite_differences(kind, rng):
    S_hat, Sigma = random_pd(rng, 5), random_pd(rng, 5)
    loss = make_loss(kind, S_hat)
    G = loss_grad_sigma(loss, Sigma)
    assert np.array_equal(G, G.T)
    h = 1e-5
    for i in range(5):
        for j in range(i, 5):
            E = np.zeros((5, 5))
            E[i, j] = E[j, i] = h
            fd = (loss.value(Sigma + E) - loss.value(Sigma - E)) / (2 * h)
            exact = G[i, j] * (1 if i == j else 2)
            assert fd == pytest.approx(exact, rel=1e-6, abs=1e-8)


@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.sampled_from(["mloglik", "frob"]))
@settings(max_examples=25, deadline=None)
def test_adjoint_gradient_matches_oracles(p, seed, kind):
    rng = np.random.default_rng(seed)
    B, C = random_model(rng, p)
    S_hat = random_pd(rng, p) / p
    loss = make_loss(kind, S_hat)
    g = grad_BC(B, C, loss)
    jB, jC = jacobian_gradient(B, C, loss)
    assert rel_err(g.grad_B, jB) <= 1e-9
    assert rel_err(g.grad_C_diag, jC) <= 1e-9
    fB, fC = fd_gradient(B, C, loss)
    assert rel_err(g.grad_B, fB) <= 1e-5
    assert rel_err(g.grad_C_diag, fC) <= 1e-5


def test_gradient_vanishes_at_exact_fit(rng):
    B, C = random_model(rng, 4)
    g = grad_BC(B, C, FrobeniusSquared(solve_lyapunov(B, C)))
    np.testing.assert_allclose(g.grad_B, 0.0, atol=1e-12)
    np.testing.assert_allclose(g.grad_C_diag, 0.0, atol=1e-12)


def test_scalar_frobenius_gradient():
    b, c, s_hat = 1.3, 0.9, 0.2
    g = grad_BC(np.array([[-b]]), np.array([[c]]), FrobeniusSquared(np.array([[s_hat]])))
    sigma = c / (2 * b)
    # d/dB at B = -b is minus d/db
    assert g.grad_B[0, 0] == pytest.approx(-2 * (sigma - s_hat) * (-c / (2 * b**2)))
    assert g.value == pytest.approx((sigma - s_hat) ** 2)


def test_likelihood_minimized_at_target(rng):
    S = random_pd(rng, 4)
    loss = GaussianNegLogLik(S)
    base = loss.value(S)
    for _ in range(50):
        A = rng.standard_normal((4, 4)) * 0.1
        assert loss.value(S + A @ A.T) >= base
        P = 0.5 * (A + A.T)
        if np.linalg.eigvalsh(S + P).min() > 0:
            assert loss.value(S + P) >= base

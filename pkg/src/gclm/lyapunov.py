"""Dense continuous Lyapunov solvers and the linear-algebra helpers they need.

The main entry point is :func:`solve_lyapunov`, which returns the unique
symmetric ``Sigma`` with ``B @ Sigma + Sigma @ B.T + C = 0`` using the
Bartels-Stewart method on a real Schur form of ``B``.  :func:`kron_solve`
solves the same equation through its vectorized Kronecker-sum form and is
kept as an independent oracle for small problems.
"""
from dataclasses import dataclass
import warnings

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NotPositiveDefinite,
    SingularLyapunov,
    ValidationError,
)

__all__ = [
    "SchurForm",
    "as_square",
    "as_symmetric",
    "schur_decompose",
    "is_stable",
    "check_mat0",
    "solve_lyapunov",
    "kron_solve",
    "lyapunov_residual",
    "cholesky",
    "is_positive_definite",
    "matrix_exp",
]

MAT0_RTOL = 1e-10


def as_square(A, name="A"):
    """Return ``A`` as a finite float64 square array, or raise ValidationError."""
    A = np.array(A, dtype=float, copy=True)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} contains NaN or Inf")
    return A


def as_symmetric(S, name="S", atol=1e-10):
    """Return a symmetric copy of ``S``; reject inputs that are clearly asymmetric."""
    S = as_square(S, name)
    scale = max(1.0, np.abs(S).max())
    if np.abs(S - S.T).max() > atol * scale:
        raise ValidationError(f"{name} is not symmetric")
    return 0.5 * (S + S.T)


@dataclass(frozen=True)
class SchurForm:
    """Real Schur factorization ``A = Q @ T @ Q.T``.

    ``T`` is quasi upper triangular with 1x1 and 2x2 diagonal blocks;
    ``eigenvalues`` are listed in block order.
    """

    Q: np.ndarray
    T: np.ndarray
    eigenvalues: np.ndarray

    @property
    def dim(self):
        return self.T.shape[0]

    def reconstruct(self):
        return self.Q @ self.T @ self.Q.T


def _block_eigenvalues(T):
    p = T.shape[0]
    eig = np.empty(p, dtype=complex)
    i = 0
    while i < p:
        if i + 1 < p and T[i + 1, i] != 0.0:
            a, b = T[i, i], T[i, i + 1]
            c, d = T[i + 1, i], T[i + 1, i + 1]
            mid = 0.5 * (a + d)
            disc = (0.5 * (a - d)) ** 2 + b * c
            if disc < 0:
                root = 1j * np.sqrt(-disc)
            else:
                root = np.sqrt(disc)
            eig[i], eig[i + 1] = mid + root, mid - root
            i += 2
        else:
            eig[i] = T[i, i]
            i += 1
    return eig


def schur_decompose(A):
    """Real Schur decomposition of a square matrix.

    Parameters
    ----------
    A : (p, p) array_like

    Returns
    -------
    SchurForm

    Raises
    ------
    ConvergenceFailure
        If the QR iteration does not converge.
    """
    A = as_square(A)
    try:
        T, Q = scipy.linalg.schur(A, output="real")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"real Schur decomposition failed: {exc}") from exc
    return SchurForm(Q=Q, T=T, eigenvalues=_block_eigenvalues(T))


def _ensure_schur(B, schur):
    if schur is None:
        return schur_decompose(B)
    if schur.dim != np.shape(B)[0]:
        raise DimensionMismatch("precomputed Schur form has the wrong dimension")
    return schur


def is_stable(A, tol=0.0, schur=None):
    """True iff every eigenvalue of ``A`` has real part ``< -tol``."""
    if tol < 0:
        raise ValidationError("tol must be non-negative")
    schur = _ensure_schur(A, schur)
    return bool(np.max(schur.eigenvalues.real) < -tol)


def check_mat0(eigenvalues, rtol=MAT0_RTOL):
    """Raise SingularLyapunov unless no two eigenvalues (with repetition) sum to ~0."""
    eig = np.asarray(eigenvalues)
    radius = np.abs(eig).max(initial=0.0)
    sums = np.abs(eig[:, None] + eig[None, :])
    smallest = sums.min()
    if smallest < rtol * max(1.0, radius):
        raise SingularLyapunov(
            f"eigenvalue pair sums to {smallest:.3e}; the Lyapunov equation has no unique solution"
        )


def solve_lyapunov(B, C, schur=None, transpose=False):
    """Solve ``B @ Sigma + Sigma @ B.T + C = 0`` for symmetric ``Sigma``.

    Parameters
    ----------
    B : (p, p) array_like
        Drift matrix in Mat0 (no two eigenvalues summing to zero).
    C : (p, p) array_like
        Symmetric right-hand side.
    schur : SchurForm, optional
        Precomputed real Schur form of ``B``; reused instead of refactorizing.
    transpose : bool
        Solve ``B.T @ X + X @ B + C = 0`` instead, using the same factors.

    Returns
    -------
    ndarray
        The symmetric solution.
    """
    B = as_square(B, "B")
    C = as_symmetric(C, "C")
    if C.shape != B.shape:
        raise DimensionMismatch(f"B is {B.shape} but C is {C.shape}")
    schur = _ensure_schur(B, schur)
    check_mat0(schur.eigenvalues)

    Q, T = schur.Q, schur.T
    F = -(Q.T @ C @ Q)
    # T Y + Y T' = F  (or T' Y + Y T = F for the transposed equation)
    trana, tranb = ("T", "N") if transpose else ("N", "T")
    Y, scale, info = lapack.dtrsyl(T, T, F, trana=trana, tranb=tranb)
    if info < 0:
        raise ValueError(f"dtrsyl: illegal argument {-info}")
    if info == 1:
        raise SingularLyapunov("quasi-triangular Sylvester solve hit near-singular eigenvalue pairs")
    Sigma = Q @ (Y / scale) @ Q.T
    return 0.5 * (Sigma + Sigma.T)


def kron_solve(B, C):
    """Solve the Lyapunov equation through its ``p**2`` vectorized linear system.

    ``(I kron B + B kron I) vec(Sigma) = -vec(C)`` is factorized densely, so this
    is only meant for small ``p`` (a few dozen at most).
    """
    B = as_square(B, "B")
    C = as_symmetric(C, "C")
    if C.shape != B.shape:
        raise DimensionMismatch(f"B is {B.shape} but C is {C.shape}")
    p = B.shape[0]
    eye = np.eye(p)
    K = np.kron(eye, B) + np.kron(B, eye)
    rhs = -C.reshape(-1, order="F")
    with warnings.catch_warnings(), np.errstate(divide="ignore", invalid="ignore"):
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            vec = scipy.linalg.solve(K, rhs)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as exc:
            raise SingularLyapunov(f"Kronecker-sum system is singular: {exc}") from exc
    if not np.all(np.isfinite(vec)):
        raise SingularLyapunov("Kronecker-sum system is singular")
    Sigma = vec.reshape(p, p, order="F")
    return 0.5 * (Sigma + Sigma.T)


def lyapunov_residual(B, Sigma, C):
    """Relative residual ``||B S + S B' + C||_F / (1 + ||C||_F)``."""
    R = B @ Sigma + Sigma @ B.T + C
    return np.linalg.norm(R) / (1.0 + np.linalg.norm(C))


def cholesky(S):
    """Lower Cholesky factor ``L`` with ``L @ L.T == S``.

    Raises
    ------
    NotPositiveDefinite
        Carries the 0-based index of the first non-positive pivot in ``pivot``.
    """
    S = as_symmetric(S, "S")
    L, info = lapack.dpotrf(S, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefinite(f"matrix is not positive definite (pivot {info - 1})", pivot=info - 1)
    if info < 0:
        raise ValueError(f"dpotrf: illegal argument {-info}")
    return L


def is_positive_definite(S):
    try:
        cholesky(S)
    except NotPositiveDefinite:
        return False
    return True


def matrix_exp(A):
    """Matrix exponential by scaling and squaring (Pade approximant)."""
    A = as_square(A)
    with np.errstate(over="raise", invalid="raise"):
        try:
            E = scipy.linalg.expm(A)
        except FloatingPointError as exc:
            raise OverflowError("matrix exponential overflowed") from exc
    if not np.all(np.isfinite(E)):
        raise OverflowError("matrix exponential overflowed")
    return E

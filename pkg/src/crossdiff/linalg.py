"""Dense real matrix kernel.

Small dense matrices (n <= 16) only. Everything here is a pure function of its
inputs.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg as sla

from .errors import ContractViolation, EigenvalueError, NotDiagonalizable

MAX_DIM = 16
EIGVEC_COND_LIMIT = 1e8
REAL_EIG_RTOL = 1e-9


def as_matrix(A, name="A"):
    """Validate and return ``A`` as a float ``(n, n)`` array."""
    M = np.asarray(A, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractViolation(f"{name} must be square, got shape {M.shape}")
    n = M.shape[0]
    if not 1 <= n <= MAX_DIM:
        raise ContractViolation(f"{name} must have dimension 1..{MAX_DIM}, got {n}")
    if not np.all(np.isfinite(M)):
        raise ContractViolation(f"{name} has non-finite entries")
    return M


def operator_norm(A):
    """Max-row-sum norm, i.e. the operator norm induced by the vector infinity norm."""
    A = as_matrix(A)
    return float(np.max(np.sum(np.abs(A), axis=1)))


def default_tol(A):
    return 1e-10 * max(1.0, operator_norm(A))


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    min_real_part: float
    eigvec_condition: float
    eigenvectors: np.ndarray

    @property
    def is_real(self):
        lam = self.eigenvalues
        return bool(np.all(np.abs(lam.imag) <= REAL_EIG_RTOL * (1.0 + np.abs(lam))))


class Inertia(NamedTuple):
    n_plus: int
    n_minus: int
    n_zero: int


def _eigvec_condition(V):
    norms = np.linalg.norm(V, axis=0)
    if np.any(norms == 0):
        return np.inf
    c = np.linalg.cond(V / norms)
    if not np.isfinite(c) or c > 1.0 / np.finfo(float).eps:
        return np.inf
    return float(c)


def _residuals(A, lam, V):
    return np.linalg.norm(A @ V - V * lam, axis=0) / np.maximum(np.linalg.norm(V, axis=0), 1e-300)


def _schur_eig(A):
    """Eigenpairs from the complex Schur form ``A = Z T Z^H`` by back substitution on ``T``."""
    T, Z = sla.schur(A, output="complex")
    n = T.shape[0]
    lam = np.diag(T).copy()
    small = np.finfo(float).eps * max(np.max(np.abs(T)), np.finfo(float).tiny)
    X = np.eye(n, dtype=complex)
    for k in range(n):
        for j in range(k - 1, -1, -1):
            d = T[j, j] - lam[k]
            if abs(d) < small:
                d = small
            X[j, k] = -(T[j, j + 1:k + 1] @ X[j + 1:k + 1, k]) / d
    return lam, Z @ X


def eigenvalues(A, tol=None):
    """Eigenvalues of a real matrix, sorted by real part.

    Parameters
    ----------
    A : (n, n) array_like
    tol : float, optional
        Relative bound on the eigenpair residual ``|Av - lam v| / (|A| |v|)``.
        Defaults to ``1e-10 * max(1, |A|)`` scaled by a roundoff allowance.

    Returns
    -------
    Spectrum
    """
    A = as_matrix(A)
    n = A.shape[0]
    normA = max(operator_norm(A), np.finfo(float).tiny)
    limit = max(tol if tol is not None else default_tol(A), 1e3 * n * np.finfo(float).eps) * normA
    limit = max(limit, 1e-8 * normA)
    try:
        lam, V = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise EigenvalueError(f"eigenvalue iteration failed: {exc}") from exc
    if np.any(_residuals(A, lam, V) > limit):
        # balancing inside geev can misplace eigenvectors when entries span
        # hundreds of orders of magnitude; the Schur route does not balance
        lam, V = _schur_eig(A)
        if np.any(_residuals(A, lam, V) > limit):
            raise EigenvalueError("eigenpair residual above tolerance", partial=lam)
    lam = lam.astype(complex)
    V = V.astype(complex)
    order = np.lexsort((lam.imag, lam.real))
    lam, V = lam[order], V[:, order]

    return Spectrum(
        eigenvalues=lam,
        min_real_part=float(np.min(lam.real)),
        eigvec_condition=_eigvec_condition(V),
        eigenvectors=V,
    )


def symmetric_part(A):
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + A.T)


def is_positive_definite(A, tol=None):
    """Return ``(verdict, margin)`` with margin the smallest eigenvalue of (A + A^T)/2."""
    A = as_matrix(A)
    if tol is None:
        tol = default_tol(A)
    margin = float(np.linalg.eigvalsh(symmetric_part(A))[0])
    return margin > tol, margin


def leading_principal_minors(A):
    """Determinants of the top-left k x k blocks, k = 1..n (LU with partial pivoting)."""
    A = as_matrix(A)
    n = A.shape[0]
    return [float(np.linalg.det(A[:k, :k])) for k in range(1, n + 1)]


def inertia_of_symmetric(S, tol=None, sym_tol=1e-10):
    """Count positive, negative and (numerically) zero eigenvalues of a symmetric matrix.

    ``tol`` is the absolute band around zero; ``sym_tol`` is the relative
    asymmetry allowed before the input is rejected.
    """
    S = as_matrix(S, "S")
    scale = max(1.0, operator_norm(S))
    if np.max(np.abs(S - S.T)) > sym_tol * scale:
        raise ContractViolation("inertia_of_symmetric requires a symmetric matrix")
    if tol is None:
        tol = default_tol(S)
    w = np.linalg.eigvalsh(symmetric_part(S))
    return Inertia(int(np.sum(w > tol)), int(np.sum(w < -tol)), int(np.sum(np.abs(w) <= tol)))


def is_diagonalizable(A, spectrum=None):
    """Real diagonalizability: real spectrum and a well-conditioned eigenbasis."""
    spec = spectrum if spectrum is not None else eigenvalues(A)
    return spec.is_real and spec.eigvec_condition < EIGVEC_COND_LIMIT


def real_eigendecomposition(A):
    """Return ``(P, lam)`` with ``A = P diag(lam) P^{-1}`` and everything real.

    Raises NotDiagonalizable for complex spectra or (numerically) defective A.
    """
    spec = eigenvalues(A)
    if not spec.is_real:
        raise NotDiagonalizable("matrix has non-real eigenvalues")
    if not spec.eigvec_condition < EIGVEC_COND_LIMIT:
        raise NotDiagonalizable(
            f"eigenvector basis condition {spec.eigvec_condition:.3g} exceeds {EIGVEC_COND_LIMIT:g}"
        )
    P = np.real(spec.eigenvectors)
    return P / np.linalg.norm(P, axis=0), np.real(spec.eigenvalues)

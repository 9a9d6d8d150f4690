"""Constructive factorizations ``A = A1 A2`` with ``A1`` symmetric positive definite.

=============================  ================  ==========  ======
kind                           requirement on A  A1          A2
=============================  ================  ==========  ======
PositiveDefinite               normally elliptic  SPD        PD
Symmetric                      diagonalizable     SPD        S
SymmetricPositiveDefinite      both               SPD        SPD
=============================  ================  ==========  ======
"""

from dataclasses import dataclass

import numpy as np

from .ellipticity import is_normally_elliptic
from .errors import NonPositiveSpectrum, NotNormallyElliptic
from .linalg import as_matrix, operator_norm, real_eigendecomposition
from .lyapunov import solve_lyapunov
from .verdict import Verdict

POSITIVE_DEFINITE = "PositiveDefinite"
SYMMETRIC = "Symmetric"
SYMMETRIC_POSITIVE_DEFINITE = "SymmetricPositiveDefinite"


@dataclass(frozen=True)
class Factorization:
    a1: np.ndarray
    a2: np.ndarray
    kind: str
    residual: float

    def to_dict(self):
        return {"kind": self.kind, "a1": self.a1.tolist(), "a2": self.a2.tolist(), "residual": self.residual}


def _finish(A, a1, a2, kind):
    return Factorization(a1, a2, kind, operator_norm(a1 @ a2 - A))


def pd_factorize(A):
    """Factor a normally elliptic matrix as (SPD) x (positive definite).

    ``H`` solves ``H A + A^T H = I``; then ``A1 = H^-1`` and ``A2 = H A`` with
    ``A2 + A2^T = I``.
    """
    A = as_matrix(A)
    verdict, margin = is_normally_elliptic(A)
    if verdict is not Verdict.PASS:
        raise NotNormallyElliptic(f"min real part of the spectrum is {margin:.3g}")
    H = solve_lyapunov(A, np.eye(A.shape[0]))
    a1 = np.linalg.inv(H)
    a1 = 0.5 * (a1 + a1.T)
    return _finish(A, a1, H @ A, POSITIVE_DEFINITE)


def sym_factorize(A):
    """Factor a real-diagonalizable matrix as (SPD) x (symmetric).

    With ``A = P diag(lam) P^-1``: ``A1 = P P^T`` and ``A2 = P^-T diag(lam) P^-1``.
    The eigenvector scaling is arbitrary, so the pair is one witness among many.
    """
    A = as_matrix(A)
    P, lam = real_eigendecomposition(A)
    return _sym_from_eig(A, P, lam, SYMMETRIC)


def _sym_from_eig(A, P, lam, kind):
    Pinv = np.linalg.inv(P)
    a1 = P @ P.T
    a2 = Pinv.T @ np.diag(lam) @ Pinv
    return _finish(A, 0.5 * (a1 + a1.T), 0.5 * (a2 + a2.T), kind)


def spd_factorize(A, tol=None):
    """Factor a diagonalizable matrix with positive spectrum as a product of two SPD matrices."""
    A = as_matrix(A)
    P, lam = real_eigendecomposition(A)
    if tol is None:
        tol = 1e-10 * max(1.0, operator_norm(A))
    if np.min(lam) <= tol:
        raise NonPositiveSpectrum(f"smallest eigenvalue {np.min(lam):.3g} is not positive")
    return _sym_from_eig(A, P, lam, SYMMETRIC_POSITIVE_DEFINITE)


FACTORIZERS = {"pd": pd_factorize, "sym": sym_factorize, "spd": spd_factorize}

"""Admissible perturbation sizes that keep ``h'' A`` positive definite."""

import math
from typing import NamedTuple

import numpy as np

from ..ellipticity import is_normally_elliptic
from ..errors import NoBoundAvailable, NotNormallyElliptic
from ..linalg import as_matrix, eigenvalues, is_diagonalizable, is_positive_definite
from ..lyapunov import solve_lyapunov
from ..verdict import Verdict

UNBOUNDED = math.inf


def _inf_cond(A):
    return np.linalg.norm(A, np.inf) * np.linalg.norm(np.linalg.inv(A), np.inf)


class PerturbationConstants(NamedTuple):
    eps0: float
    eps1: float
    eps2: float
    lambda_star: float
    C1: float
    kappa: float
    K: float


def perturbation_constants(S, N, hess, A, samples, tol=1e-10):
    """All constants behind :func:`perturbation_bound_symmetric`.

    ``S``, ``N``, ``hess`` and ``A`` are callables ``u -> matrix``. With
    ``lambda*`` the smallest sampled spectral real part of ``A``, ``C1`` the
    largest ``cond_inf(A) |hess^-1 N|_inf`` (Bauer-Fike), ``kappa`` the smallest
    eigenvalue of ``S`` and ``K`` the largest ``|N|_2``:
    ``eps1 = lambda* / (2 C1)``, ``eps2 = kappa / K``, ``eps0 = min(eps1, eps2)``.
    """
    lam_star, C1, kappa, K = math.inf, 0.0, math.inf, 0.0
    for u in np.atleast_2d(np.asarray(samples, dtype=float)):
        Au = as_matrix(A(u))
        Su = as_matrix(S(u), "S")
        Nu = as_matrix(N(u), "N")
        Hu = as_matrix(hess(u), "hess")
        spec = eigenvalues(Au)
        if not is_diagonalizable(Au, spec):
            raise NoBoundAvailable(f"A(u) is not diagonalizable at u={u.tolist()}")
        lam_star = min(lam_star, spec.min_real_part)
        C1 = max(C1, _inf_cond(Au) * np.linalg.norm(np.linalg.solve(Hu, Nu), np.inf))
        kappa = min(kappa, float(np.linalg.eigvalsh(0.5 * (Su + Su.T))[0]))
        K = max(K, float(np.linalg.norm(Nu, 2)))
    if lam_star <= tol:
        raise NoBoundAvailable(f"sampled spectral margin {lam_star:.3g} is not positive")
    if kappa <= tol:
        raise NoBoundAvailable(f"S is not positive definite at the samples (min eigenvalue {kappa:.3g})")
    eps1 = UNBOUNDED if C1 == 0 else lam_star / (2.0 * C1)
    eps2 = UNBOUNDED if K == 0 else kappa / K
    return PerturbationConstants(min(eps1, eps2), eps1, eps2, lam_star, C1, kappa, K)


def perturbation_bound_symmetric(S, N, hess, A, samples, tol=1e-10):
    """Largest ``eps`` guaranteed by the sampled constants for ``h'' A = S + eps N``.

    Returns ``math.inf`` when ``N`` vanishes at every sample.
    """
    return perturbation_constants(S, N, hess, A, samples, tol).eps0


def perturbation_bound_constant(A0, A1_sup_norm):
    """Bound ``lambda / M`` for ``A(u) = A0 + eps A1(u)`` with the quadratic entropy of ``A0``.

    ``H A0 + A0^T H = I`` gives ``lambda = 1/2`` as the positive-definiteness
    margin of ``H A0``; ``M = |H|_2 sup|A1|``. Returns ``math.inf`` if ``A1`` vanishes.
    """
    A0 = as_matrix(A0, "A0")
    verdict, margin = is_normally_elliptic(A0)
    if verdict is not Verdict.PASS:
        raise NotNormallyElliptic(f"min real part of the spectrum is {margin:.3g}")
    if A1_sup_norm < 0:
        raise ValueError("A1_sup_norm must be non-negative")
    H = solve_lyapunov(A0, np.eye(A0.shape[0]))
    _, lam = is_positive_definite(H @ A0, tol=0.0)
    M = float(np.linalg.norm(H, 2)) * A1_sup_norm
    return UNBOUNDED if M == 0 else lam / M

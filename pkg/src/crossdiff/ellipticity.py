"""Normal-ellipticity tests and certificates.

A matrix is normally elliptic when every eigenvalue has positive real part.
Besides the direct spectral test this module offers the cheaper sufficient
certificates used for the catalog models (diagonal dominance after a diagonal
similarity, Routh-Hurwitz for n = 3, the 2x2 fluid criterion and the
volume-filling factorization).
"""

from itertools import product
from typing import NamedTuple

import numpy as np

from . import models as _models
from .errors import ContractViolation, DomainError
from .linalg import as_matrix, eigenvalues, is_diagonalizable, leading_principal_minors, operator_norm
from .verdict import Verdict


def ne_tol(A):
    return 1e-9 * (1.0 + operator_norm(A))


def is_normally_elliptic(A, tol=None):
    """Spectral test. Returns ``(verdict, min_real_part)``.

    The verdict is INDETERMINATE when the smallest real part lies within
    ``tol`` of zero (default ``1e-9 (1 + |A|)``).
    """
    A = as_matrix(A)
    if tol is None:
        tol = ne_tol(A)
    margin = eigenvalues(A).min_real_part
    return Verdict.from_margin(margin, tol), margin


class RouthHurwitz(NamedTuple):
    verdict: bool
    b0: float
    b1: float
    b2: float


def routh_hurwitz_3(A):
    """Routh-Hurwitz test for a 3x3 matrix.

    With ``b2 = tr A``, ``b1`` the sum of the 2x2 principal minors and
    ``b0 = det A``, all eigenvalues of ``A`` have positive real part iff
    ``b0, b1, b2 > 0`` and ``b2 b1 > b0``.
    """
    A = as_matrix(A)
    if A.shape != (3, 3):
        raise ContractViolation(f"routh_hurwitz_3 needs a 3x3 matrix, got {A.shape}")
    b2 = float(np.trace(A))
    b1 = float(sum(A[i, i] * A[j, j] - A[i, j] * A[j, i] for i, j in ((0, 1), (0, 2), (1, 2))))
    b0 = float(np.linalg.det(A))
    ok = b0 > 0 and b1 > 0 and b2 > 0 and b2 * b1 > b0
    return RouthHurwitz(ok, b0, b1, b2)


def diagonal_dominance_certificate(A, u):
    """Sufficient NE test: ``U^-1 A U`` (U = diag(u)) has a positive diagonal and strict row dominance."""
    A = as_matrix(A)
    u = np.asarray(u, dtype=float)
    if u.shape != (A.shape[0],) or np.any(~np.isfinite(u)) or np.any(u <= 0):
        raise ContractViolation("u must be a strictly positive vector of matching length")
    At = A * u[None, :] / u[:, None]
    diag = np.diag(At)
    off = np.sum(np.abs(At), axis=1) - np.abs(diag)
    return bool(np.all(diag > 0) and np.all(diag > off))


def _skt_coefficients(a0, a):
    a0 = np.asarray(a0, dtype=float)
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a0.shape != (a.shape[0],):
        raise ContractViolation("SKT coefficients need a0 of length n and an n x n matrix a")
    if np.any(a0 < 0) or np.any(a < 0):
        raise ContractViolation("SKT coefficients must be non-negative")
    return a0, a


def skt_ne_certificate(a0, a):
    """Sufficient condition for SKT normal ellipticity: ``a_i0 + a_ii > 0`` for all i."""
    a0, a = _skt_coefficients(a0, a)
    return bool(np.all(a0 + np.diag(a) > 0))


def skt3_admissible_triples(a0, a):
    """Index triples (1-based) for the n = 3 Routh-Hurwitz condition on SKT coefficients.

    With ``b_ij = a_ij`` (i != j) and ``b_ii = a_i0 + a_ii``, a triple
    ``(i, j, k)`` qualifies when ``(i, j) != (2, 1)``, ``(i, k) != (3, 1)``,
    ``(j, k) != (3, 2)`` and ``b_1i b_2j b_3k > 0``.
    """
    a0, a = _skt_coefficients(a0, a)
    if a.shape != (3, 3):
        raise ContractViolation("the triple condition is stated for n = 3")
    b = a.copy()
    b[np.diag_indices(3)] = a0 + np.diag(a)
    found = []
    for i, j, k in product((1, 2, 3), repeat=3):
        if (i, j) == (2, 1) or (i, k) == (3, 1) or (j, k) == (3, 2):
            continue
        if b[0, i - 1] * b[1, j - 1] * b[2, k - 1] > 0:
            found.append((i, j, k))
    return found


def _pressure_model(model):
    if model.family not in ("SktLinear", "SktPower", "FluidPoly"):
        raise ContractViolation(f"{model.family} does not expose transition rates p_i")
    return model


def generalized_skt_condition(model, samples):
    """Check ``dp_i/du_j >= 0`` and ``p_i > sum_{k != i} u_k dp_i/du_k`` at every sample.

    Sufficient for normal ellipticity of ``A_ij = delta_ij p_i + u_i dp_i/du_j``.
    """
    _pressure_model(model)
    U = np.atleast_2d(np.asarray(samples, dtype=float))
    try:
        _models.check_domain(model, U)
    except DomainError as exc:
        raise ContractViolation(str(exc)) from exc
    p = _models.pressures(model, U)
    Q = _models.pressure_jacobian_batch(model, U)
    if np.any(Q < 0):
        return False
    weighted = Q * U[:, None, :]
    off = np.sum(weighted, axis=-1) - np.diagonal(weighted, axis1=-2, axis2=-1)
    return bool(np.all(p > off))


class FluidCriterion(NamedTuple):
    ne: bool
    pd: bool


def fluid_2x2_iff(a):
    """Two-species linear-pressure fluid model ``A(u) = diag(u) a``.

    ``ne``: A(u) is normally elliptic on the whole orthant iff ``det a > 0``.
    ``pd``: ``a`` itself positive definite, iff ``det a > (a12 - a21)^2 / 4``.
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (2, 2) or np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ContractViolation("fluid_2x2_iff needs a non-negative 2x2 matrix")
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    pd = bool(a[0, 0] > 0 and det > 0.25 * (a[0, 1] - a[1, 0]) ** 2)
    return FluidCriterion(bool(det > 0), pd)


def volume_filling_factors(model, u):
    """Symmetric factorization ``A(u) = A1 A2`` of the separable volume-filling matrix.

    Returns ``(A1, A2, R, V)`` where ``V = prod_k q_k'/q_k``,
    ``R_i = (1/u_i + p_i'/p_i) prod_{k != i} q_k'/q_k``, ``A2 = diag(R) + V 11^T``.
    """
    if model.family != "VolumeFillingSeparable":
        raise ContractViolation("factorization is for VolumeFillingSeparable")
    u = _models.check_domain(model, u)
    p, dp, q, dq = _models.volume_filling_parts(model, u)
    ratio = dq / q
    V = float(np.prod(ratio))
    others = np.array([np.prod(np.delete(ratio, i)) for i in range(model.n)])
    R = (1.0 / u + dp / p) * others
    A1 = np.diag(u * p * q / others)
    A2 = np.diag(R) + V * np.ones((model.n, model.n))
    return A1, A2, R, V


def volume_filling_certificate(model, samples):
    """Sampled certificate that the separable volume-filling matrix is NE and diagonalizable.

    Per sample: leading minors of the symmetric factor against the closed form
    ``prod_{k<=i} R_k (1 + V sum_{k<=i} 1/R_k)``, their positivity, and the
    direct spectral and diagonalizability tests of ``A(u)``.
    """
    records = []
    for u in np.atleast_2d(samples):
        A1, A2, R, V = volume_filling_factors(model, u)
        minors = np.array(leading_principal_minors(A2))
        closed = np.array([np.prod(R[: i + 1]) * (1.0 + V * np.sum(1.0 / R[: i + 1])) for i in range(model.n)])
        A = _models.diffusion_matrix(model, u)
        verdict, margin = is_normally_elliptic(A)
        records.append({
            "u": u.tolist(),
            "minors": minors.tolist(),
            "closed_form": closed.tolist(),
            "minor_rel_err": float(np.max(np.abs(minors - closed) / np.abs(closed))),
            "minors_positive": bool(np.all(closed > 0) and np.all(minors > 0)),
            "factor_residual": float(np.max(np.abs(A1 @ A2 - A))),
            "ne": verdict,
            "ne_margin": margin,
            "diagonalizable": is_diagonalizable(A),
        })
    ok = all(r["minors_positive"] and r["ne"] is Verdict.PASS and r["diagonalizable"] for r in records)
    return ok, records

"""Lyapunov matrix equation ``H A + A^T H = G``.

The direct solver works on the n^2 x n^2 Kronecker system. The integral
oracle builds ``H = int_0^inf exp(-A^T t) exp(-A t) dt`` from a separately
coded matrix exponential and Simpson quadrature so the two never share a
code path beyond numpy primitives.
"""

import math

import numpy as np
import scipy.linalg as spla

from .errors import DivergenceError, SolvabilityError
from .linalg import as_matrix, eigenvalues, operator_norm


def solve_lyapunov(A, G):
    """Solve ``H A + A^T H = G`` for ``H``.

    Raises SolvabilityError when some pair of eigenvalues of ``A`` sums to
    (numerically) zero, which makes the Kronecker operator singular.
    """
    A = as_matrix(A)
    G = as_matrix(G, "G")
    n = A.shape[0]
    if G.shape != A.shape:
        raise ValueError(f"G has shape {G.shape}, expected {A.shape}")

    lam = eigenvalues(A).eigenvalues
    pair_sums = np.abs(lam[:, None] + lam[None, :])
    if np.min(pair_sums) <= 1e-10 * max(1.0, operator_norm(A)):
        raise SolvabilityError("lambda_i + lambda_j = 0 for some eigenvalue pair of A")

    eye = np.eye(n)
    # row-major vec: vec(H A) = (I kron A^T) vec(H), vec(A^T H) = (A^T kron I) vec(H)
    K = np.kron(eye, A.T) + np.kron(A.T, eye)
    try:
        lu, piv = spla.lu_factor(K, check_finite=False)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SolvabilityError(str(exc)) from exc
    if np.any(np.abs(np.diag(lu)) == 0):
        raise SolvabilityError("singular Kronecker system")
    H = spla.lu_solve((lu, piv), G.ravel(), check_finite=False).reshape(n, n)
    if np.allclose(G, G.T, rtol=0, atol=1e-14 * max(1.0, np.max(np.abs(G)))):
        H = 0.5 * (H + H.T)
    return H


def lyapunov_residual(A, H, G):
    A, H, G = (np.asarray(M, dtype=float) for M in (A, H, G))
    return float(np.linalg.norm(H @ A + A.T @ H - G, ord=np.inf))


# Pade(6,6) numerator coefficients: c_k = (2m-k)! m! / ((2m)! k! (m-k)!)
_PADE6 = [
    math.factorial(12 - k) * math.factorial(6) / (math.factorial(12) * math.factorial(k) * math.factorial(6 - k))
    for k in range(7)
]


def expm_pade6(A):
    """Matrix exponential by scaling and squaring with a degree-6 diagonal Pade approximant."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    norm1 = np.max(np.sum(np.abs(A), axis=0)) if n else 0.0
    s = max(0, int(math.ceil(math.log2(norm1 / 0.5)))) if norm1 > 0.5 else 0
    X = A / (2.0**s)
    eye = np.eye(n)
    powers = [eye, X]
    for _ in range(2, 7):
        powers.append(powers[-1] @ X)
    even = sum(_PADE6[k] * powers[k] for k in range(0, 7, 2))
    odd = sum(_PADE6[k] * powers[k] for k in range(1, 7, 2))
    E = np.linalg.solve(even - odd, even + odd)
    for _ in range(s):
        E = E @ E
    return E


def _decay(A, t):
    """``|exp(-A t)|_2``, with overflow reported as infinity."""
    with np.errstate(over="ignore", invalid="ignore"):
        E = expm_pade6(-A * t)
    return float(np.linalg.norm(E, 2)) if np.all(np.isfinite(E)) else math.inf


def lyapunov_integral_oracle(A, t_max=None, steps=None):
    """Approximate ``int_0^t_max exp(-A^T t) exp(-A t) dt`` by composite Simpson.

    With ``t_max=None`` the horizon is doubled until ``|exp(-A t)| < 1e-8``;
    if that needs more than ``t = 1e4`` the integral is treated as divergent.
    With ``steps=None`` the step is chosen so that ``h |A| <= 0.02``.
    """
    A = as_matrix(A)
    n = A.shape[0]
    normA = max(operator_norm(A), 1e-12)

    if t_max is None:
        t_max = 1.0 / normA
        while _decay(A, t_max) >= 1e-8:
            t_max *= 2.0
            if t_max > 1e4:
                raise DivergenceError("exp(-A t) does not decay; A is not normally elliptic")
    elif _decay(A, t_max) >= 1e-8:
        raise DivergenceError(f"|exp(-A t_max)| >= 1e-8 at t_max={t_max}; horizon too short or A not normally elliptic")

    if steps is None:
        steps = int(math.ceil(t_max * normA / 0.02))
    steps += steps % 2
    h = t_max / steps

    step = expm_pade6(-A * h)
    E = np.eye(n)
    total = E.T @ E
    for k in range(1, steps + 1):
        E = E @ step
        weight = 1.0 if k == steps else (4.0 if k % 2 else 2.0)
        total = total + weight * (E.T @ E)
    H = total * (h / 3.0)
    return 0.5 * (H + H.T)


def det_identity_table(matrices):
    """Compare ``det H`` with ``1 / (2 tr A)`` for ``H A + A^T H = I``.

    The closed form ``det H = 1/(2 tr A)`` swaps a determinant and an integral
    and does not hold in general (it does for n = 1). Returned rows are for
    reporting only.
    """
    rows = []
    for A in matrices:
        A = as_matrix(A)
        H = solve_lyapunov(A, np.eye(A.shape[0]))
        det_h = float(np.linalg.det(H))
        claimed = 1.0 / (2.0 * float(np.trace(A)))
        rows.append({
            "A": A.tolist(),
            "det_H": det_h,
            "inv_two_trace": claimed,
            "abs_diff": abs(det_h - claimed),
        })
    return rows

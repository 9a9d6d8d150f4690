"""Independent reference computations used by the tests.

Nothing here calls into crossdiff; each helper is a second route to a value
the package computes another way.
"""

from fractions import Fraction

import numpy as np


def frac_matrix(rows):
    return [[Fraction(x) for x in row] for row in rows]


def frac_matmul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    return [[sum((A[i][k] * B[k][j] for k in range(m)), Fraction(0)) for j in range(p)] for i in range(n)]


def frac_transpose(A):
    return [list(col) for col in zip(*A)]


def cofactor_det(A):
    """Laplace expansion along the first row; exact for Fraction entries."""
    n = len(A)
    if n == 1:
        return A[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        total += (-1) ** j * A[0][j] * cofactor_det(minor)
    return total


def leading_minors_cofactor(A):
    A = [list(r) for r in A]
    return [cofactor_det([row[:k] for row in A[:k]]) for k in range(1, len(A) + 1)]


def charpoly(A):
    """Faddeev-LeVerrier coefficients ``[1, c1, ..., cn]`` of ``det(lambda I - A)``."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(A)
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(A @ M) / k)
    return np.array(coeffs)


def eigenvalues_by_roots(A):
    return np.roots(charpoly(A))


def sorted_complex(z):
    z = np.asarray(z, dtype=complex)
    return z[np.lexsort((z.imag, z.real))]


def fd_gradient(f, u, h=1e-6):
    u = np.asarray(u, dtype=float)
    g = np.zeros_like(u)
    for i in range(len(u)):
        e = np.zeros_like(u)
        e[i] = h
        g[i] = (f(u + e) - f(u - e)) / (2 * h)
    return g


def fd_jacobian(F, u, h=1e-6):
    u = np.asarray(u, dtype=float)
    cols = []
    for j in range(len(u)):
        e = np.zeros_like(u)
        e[j] = h
        cols.append((np.asarray(F(u + e)) - np.asarray(F(u - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def gershgorin_ne_matrix(rng, n, spread=2.0):
    """Random matrix whose Gershgorin discs lie in the open right half plane."""
    M = rng.uniform(-spread, spread, (n, n))
    radius = np.sum(np.abs(M), axis=1) - np.abs(np.diag(M))
    M[np.diag_indices(n)] = radius + rng.uniform(0.1, 1.0, n)
    return M


def similar_ne_matrix(rng, n):
    """``S diag(d) S^-1`` with positive ``d`` and a well-conditioned random ``S``."""
    while True:
        S = rng.normal(size=(n, n))
        if np.linalg.cond(S) < 50:
            break
    d = rng.uniform(0.2, 3.0, n)
    return S @ np.diag(d) @ np.linalg.inv(S)


def rotation_ne_matrix(rng, n):
    """Block matrix with complex eigenvalue pairs of positive real part, conjugated randomly."""
    B = np.zeros((n, n))
    i = 0
    while i < n:
        if i + 1 < n and rng.random() < 0.6:
            a, b = rng.uniform(0.2, 2.0), rng.uniform(0.2, 3.0)
            B[i:i + 2, i:i + 2] = [[a, b], [-b, a]]
            i += 2
        else:
            B[i, i] = rng.uniform(0.2, 2.0)
            i += 1
    while True:
        S = rng.normal(size=(n, n))
        if np.linalg.cond(S) < 30:
            break
    return S @ B @ np.linalg.inv(S)


def random_ne_matrix(rng, n):
    kind = rng.integers(3)
    return (gershgorin_ne_matrix, similar_ne_matrix, rotation_ne_matrix)[kind](rng, n)


def random_spd(rng, n, floor=0.2):
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return Q @ np.diag(rng.uniform(floor, 3.0, n)) @ Q.T


def random_symmetric(rng, n):
    M = rng.normal(size=(n, n))
    return 0.5 * (M + M.T)

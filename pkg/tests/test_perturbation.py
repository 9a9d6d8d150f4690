import math

import numpy as np
import pytest

from crossdiff.entropy import (
    UNBOUNDED,
    perturbation_bound_constant,
    perturbation_bound_symmetric,
    perturbation_constants,
)
from crossdiff.errors import NoBoundAvailable, NotNormallyElliptic
from crossdiff.ellipticity import is_normally_elliptic
from crossdiff.linalg import is_positive_definite

I2 = lambda u: np.eye(2)  # noqa: E731
Z2 = lambda u: np.zeros((2, 2))  # noqa: E731
PTS = np.array([[0.5, 1.0], [2.0, 0.3]])


def test_zero_perturbation_is_unbounded():
    assert perturbation_bound_symmetric(I2, Z2, I2, I2, PTS) == UNBOUNDED == math.inf


def test_identity_constants():
    c = perturbation_constants(I2, I2, I2, I2, PTS)
    assert (c.kappa, c.K, c.eps2) == (1.0, 1.0, 1.0)
    assert c.lambda_star == pytest.approx(1.0) and c.C1 == pytest.approx(1.0)
    assert c.eps0 <= 1.0 and c.eps0 == pytest.approx(0.5)


def test_indefinite_symmetric_part():
    with pytest.raises(NoBoundAvailable):
        perturbation_bound_symmetric(lambda u: np.diag([1.0, -1.0]), I2, I2, I2, PTS)


def test_non_diagonalizable_A():
    with pytest.raises(NoBoundAvailable):
        perturbation_bound_symmetric(I2, I2, I2, lambda u: np.array([[1.0, 1.0], [0.0, 1.0]]), PTS)


def test_symmetric_bound_keeps_pd(rng):
    # h'' = diag(1/u), S = diag(1/u) A0(u) with A0 diagonal, N a fixed skew-free coupling
    N = np.array([[0.0, 1.0], [1.0, 0.5]])
    hess = lambda u: np.diag(1 / u)  # noqa: E731
    A0 = lambda u: np.diag([1 + u[0], 2.0])  # noqa: E731
    S = lambda u: hess(u) @ A0(u)  # noqa: E731
    pts = rng.uniform(0.2, 2, (40, 2))
    eps0 = perturbation_bound_symmetric(S, lambda u: N, hess, A0, pts)
    assert 0 < eps0 < math.inf
    for eps in (0.25 * eps0, 0.99 * eps0):
        for u in pts:
            assert is_positive_definite(S(u) + eps * N)[0]


def test_constant_examples():
    assert perturbation_bound_constant(np.eye(2), 1.0) == pytest.approx(1.0)
    assert perturbation_bound_constant(np.eye(2), 0.0) == UNBOUNDED
    with pytest.raises(NotNormallyElliptic):
        perturbation_bound_constant([[0, 1], [-1, 0]], 1.0)


def test_constant_bound_preserves_ellipticity(rng):
    A0 = np.array([[1.0, 2.0], [0.0, 2.0]])
    bound = perturbation_bound_constant(A0, 1.0)
    H = np.array([[1 / 2, -1 / 3], [-1 / 3, 7 / 12]])
    for _ in range(200):
        A1 = rng.normal(size=(2, 2))
        A1 /= np.linalg.norm(A1, 2)
        A = A0 + 0.99 * bound * A1
        assert is_positive_definite(H @ A)[0]
        assert is_normally_elliptic(A)[0]

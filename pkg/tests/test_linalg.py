from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from crossdiff.errors import ContractViolation, NotDiagonalizable
from crossdiff.linalg import (
    as_matrix,
    eigenvalues,
    inertia_of_symmetric,
    is_diagonalizable,
    is_positive_definite,
    leading_principal_minors,
    operator_norm,
    real_eigendecomposition,
)
from oracles import eigenvalues_by_roots, frac_matrix, leading_minors_cofactor, random_spd, random_symmetric, sorted_complex

CYCLIC = [[1, 0, 1], [1, 1, 0], [0, 1, 1]]


def test_eigenvalues_identity():
    spec = eigenvalues(np.eye(3))
    assert np.allclose(spec.eigenvalues, [1, 1, 1])
    assert spec.min_real_part == pytest.approx(1.0)
    assert spec.is_real


def test_eigenvalues_complex_pair():
    spec = eigenvalues([[1, -4], [1, 1]])
    assert np.allclose(spec.eigenvalues, [1 - 2j, 1 + 2j])
    assert not spec.is_real


def test_eigenvalues_cyclic_against_root_oracle():
    # frozen from the characteristic polynomial l^3 - 3 l^2 + 3 l - 2 = (l - 2)(l^2 - l + 1)
    expected = sorted_complex([2, 0.5 + 1j * np.sqrt(3) / 2, 0.5 - 1j * np.sqrt(3) / 2])
    got = eigenvalues(CYCLIC).eigenvalues
    assert np.allclose(got, expected, atol=1e-12)
    assert np.allclose(got, sorted_complex(eigenvalues_by_roots(CYCLIC)), atol=1e-10)


def test_spectrum_sorted_and_conjugate_pairs(rng):
    for _ in range(30):
        A = rng.normal(size=(5, 5))
        lam = eigenvalues(A).eigenvalues
        assert np.all(np.diff(lam.real) >= -1e-12)
        assert np.allclose(sorted_complex(lam), sorted_complex(np.conj(lam)), atol=1e-9)


@pytest.mark.parametrize("n", range(1, 9))
def test_trace_and_determinant_identities(rng, n):
    for _ in range(10):
        A = rng.normal(size=(n, n))
        lam = eigenvalues(A).eigenvalues
        assert np.sum(lam).real == pytest.approx(np.trace(A), rel=1e-8, abs=1e-8)
        assert np.prod(lam).real == pytest.approx(np.linalg.det(A), rel=1e-8, abs=1e-8)


def test_eigenvalues_match_charpoly_oracle(rng):
    for n in (2, 3, 4):
        for _ in range(20):
            A = rng.uniform(-2, 2, (n, n))
            assert np.allclose(eigenvalues(A).eigenvalues, sorted_complex(eigenvalues_by_roots(A)), atol=1e-7)


def test_defective_matrix_has_huge_eigvec_condition():
    spec = eigenvalues([[1, 1], [0, 1]])
    assert spec.eigvec_condition > 1e8
    assert not is_diagonalizable([[1, 1], [0, 1]])


def test_as_matrix_rejects_bad_input():
    with pytest.raises(ContractViolation):
        as_matrix([[1, 2, 3]])
    with pytest.raises(ContractViolation):
        as_matrix([[np.nan]])
    with pytest.raises(ContractViolation):
        as_matrix(np.eye(17))


def test_is_positive_definite_examples():
    assert is_positive_definite(np.eye(2)) == (True, pytest.approx(1.0))
    ok, margin = is_positive_definite([[0.5, 1 / 3], [-1 / 3, 0.5]])
    assert ok and margin == pytest.approx(0.5, abs=1e-15)
    ok, margin = is_positive_definite([[0, 1], [1, 0]])
    assert not ok and margin == pytest.approx(-1.0)


def test_positive_definite_invariant_under_symmetrization(rng):
    for _ in range(50):
        A = rng.normal(size=(4, 4)) + 1.5 * np.eye(4)
        ok1, m1 = is_positive_definite(A)
        ok2, m2 = is_positive_definite(A + A.T)
        assert ok1 == ok2
        assert m2 == pytest.approx(2 * m1, abs=1e-12)


def test_leading_minors_examples():
    assert leading_principal_minors(np.eye(3)) == pytest.approx([1, 1, 1])
    assert leading_principal_minors([[5, 2], [2, 1]]) == pytest.approx([5, 1])
    assert leading_principal_minors(CYCLIC) == pytest.approx([1, 1, 2])


def test_leading_minors_against_cofactor_oracle(rng):
    for _ in range(20):
        A = rng.integers(-3, 4, (4, 4))
        exact = [float(x) for x in leading_minors_cofactor(frac_matrix(A.tolist()))]
        assert leading_principal_minors(A) == pytest.approx(exact, abs=1e-9)


def test_inertia_examples():
    assert tuple(inertia_of_symmetric(np.eye(2))) == (2, 0, 0)
    assert tuple(inertia_of_symmetric([[1, -2], [-2, 6]])) == (2, 0, 0)
    assert tuple(inertia_of_symmetric(np.diag([1.0, 0.0, -1.0]))) == (1, 1, 1)
    with pytest.raises(ContractViolation):
        inertia_of_symmetric([[1, 2], [0, 1]])


def test_sylvester_criterion(rng):
    for _ in range(100):
        n = int(rng.integers(1, 6))
        S = random_symmetric(rng, n) + rng.uniform(-1, 2) * np.eye(n)
        minors_pos = all(m > 0 for m in leading_principal_minors(S))
        assert minors_pos == (inertia_of_symmetric(S).n_plus == n)


def test_inertia_congruence(rng):
    # the real spectrum of A1 A2 carries the inertia of A2 when A1 is spd
    for _ in range(60):
        n = int(rng.integers(1, 7))
        A1 = random_spd(rng, n)
        A2 = random_symmetric(rng, n)
        lam = eigenvalues(A1 @ A2).eigenvalues.real
        inert = inertia_of_symmetric(A2)
        assert (np.sum(lam > 1e-9), np.sum(lam < -1e-9)) == (inert.n_plus, inert.n_minus)


def test_operator_norm():
    assert operator_norm(np.eye(3)) == 1
    assert operator_norm([[1, 2], [0, 2]]) == 3
    assert operator_norm(np.zeros((2, 2))) == 0


def test_real_eigendecomposition():
    P, lam = real_eigendecomposition([[1, 2], [0, 2]])
    assert np.allclose(P @ np.diag(lam) @ np.linalg.inv(P), [[1, 2], [0, 2]])
    with pytest.raises(NotDiagonalizable):
        real_eigendecomposition([[0, 1], [-1, 0]])
    with pytest.raises(NotDiagonalizable):
        real_eigendecomposition([[1, 1], [0, 1]])


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (3, 3), elements=st.floats(-5, 5)))
def test_eigenvalue_count_and_min_real_part(A):
    spec = eigenvalues(A)
    assert spec.eigenvalues.shape == (3,)
    assert spec.min_real_part == pytest.approx(np.min(spec.eigenvalues.real))


def test_fraction_minor_example_exact():
    assert leading_minors_cofactor(frac_matrix([[5, 2], [2, 1]])) == [Fraction(5), Fraction(1)]

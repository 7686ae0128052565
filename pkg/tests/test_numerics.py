import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quenchqsl import numerics
from quenchqsl.config import DEFAULT_TOLERANCES


def cofactor_det(a):
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    return sum((-1) ** j * a[0, j] * cofactor_det(np.delete(a[1:], j, axis=1)) for j in range(n))


def parity(perm):
    inv = sum(1 for i, j in itertools.combinations(range(len(perm)), 2) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


def test_det_trivial_cases():
    assert numerics.determinant([[2 - 3j]]) == 2 - 3j
    assert numerics.determinant(np.eye(5)) == pytest.approx(1 + 0j, abs=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_det_against_cofactor_expansion(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    assert numerics.determinant(a) == pytest.approx(cofactor_det(a), rel=1e-12)


def test_det_of_triangular_factors(rng):
    lower = np.tril(rng.normal(size=(6, 6)), -1) + np.eye(6)
    upper = np.triu(rng.normal(size=(6, 6)))
    expected = np.prod(np.diag(upper))
    assert numerics.determinant(lower @ upper) == pytest.approx(expected, rel=1e-10)


@given(st.permutations(list(range(5))))
def test_row_permutation_flips_sign_by_parity(perm):
    a = np.arange(25, dtype=float).reshape(5, 5) ** 1.3 + np.eye(5)
    d = numerics.determinant(a)
    assert numerics.determinant(a[list(perm)]) == pytest.approx(parity(perm) * d, rel=1e-9)


def test_unitary_has_unit_modulus(rng):
    q, _ = np.linalg.qr(rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12)))
    assert abs(abs(numerics.determinant(q)) - 1) < 1e-10


def test_stacked_det_and_log_det(rng):
    stack = rng.normal(size=(4, 3, 3))
    np.testing.assert_allclose(numerics.determinant(stack), np.linalg.det(stack))
    sign, logabs = numerics.log_determinant(1e-200 * np.eye(5))
    assert sign == 1 and logabs == pytest.approx(5 * np.log(1e-200))


def test_det_rejects_bad_input():
    with pytest.raises(ValueError):
        numerics.determinant(np.ones((2, 3)))
    with pytest.raises(ValueError):
        numerics.determinant([[np.nan]])


def test_eigh_small_cases():
    np.testing.assert_allclose(numerics.eigh(np.diag([3.0, 1.0, 2.0])).eigenvalues, [1, 2, 3])
    np.testing.assert_allclose(numerics.eigh([[0.0, 1.0], [1.0, 0.0]]).eigenvalues, [-1, 1], atol=1e-15)


def test_eigh_random_invariants(rng):
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    h = a + a.conj().T
    dec = numerics.eigh(h).check(h)
    assert abs(dec.eigenvalues.sum() - np.trace(h).real) <= 1e-10 * np.linalg.norm(h, 2)


def test_eigh_rejects_non_hermitian_and_empty():
    with pytest.raises(ValueError, match="Hermitian"):
        numerics.eigh([[0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(ValueError):
        numerics.eigh(np.zeros((0, 0)))


def test_eigh_symmetrizes_roundoff():
    h = np.array([[1.0, 2.0], [2.0 + 1e-12, 5.0]])
    assert numerics.hermiticity_defect(h) == pytest.approx(1e-12, rel=1e-3)
    numerics.eigh(h, DEFAULT_TOLERANCES).check(0.5 * (h + h.T))


def test_linear_fit_exact_and_constant():
    fit = numerics.linear_fit([0, 1, 2, 3], [1, 3, 5, 7])
    assert (fit.slope, fit.intercept, fit.r_squared) == pytest.approx((2, 1, 1))
    assert numerics.linear_fit([0, 1, 2], [4, 4, 4]).slope == 0
    with pytest.raises(ValueError):
        numerics.linear_fit([1, 1], [0, 2])


@pytest.mark.parametrize("seed", range(20))
def test_linear_fit_noisy_line_within_three_sigma(seed):
    r = np.random.default_rng(seed)
    x = np.linspace(0, 10, 50)
    sigma = 0.3
    y = 1.7 * x - 0.4 + r.normal(0, sigma, x.size)
    fit = numerics.linear_fit(x, y)
    slope_err = sigma / np.sqrt(np.sum((x - x.mean()) ** 2))
    assert abs(fit.slope - 1.7) < 3 * slope_err

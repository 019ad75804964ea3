"""Tests for dense matrix arithmetic, Perron pairs, and closed-form series."""
from fractions import Fraction
from math import comb

import numpy
import pytest

from mg1tail.exceptions import OutsideRadius, SingularMatrix
from mg1tail.linalg import (lu_det_complex, matrix_power_series,
                            negative_binomial_tail, perron_pair, right_solve,
                            root_of_unity, solve_complex, stationary_vector)
from mg1tail.model import GeometricTail
from mg1tail.tests.cofactors import adjugate, cofactor_determinant


@pytest.mark.parametrize(
    "angle, expected",
    [
        (Fraction(0), 1.0),
        (Fraction(1, 4), 1j),
        (Fraction(1, 2), -1.0),
        (Fraction(3, 4), -1j),
        (Fraction(5, 4), 1j),
        (Fraction(-1, 2), -1.0),
    ],
)
def test_root_of_unity_exact(angle, expected):
    assert root_of_unity(angle) == expected


def test_root_of_unity_conjugate_pair():
    w = root_of_unity(Fraction(1, 3))

    assert root_of_unity(Fraction(2, 3)) == pytest.approx(w.conjugate(), abs=1e-15)
    assert w**3 == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize(
    "m, expected",
    [
        ([[2.0, 1.0], [1.0, 3.0]], 5.0),
        ([[0.0, 1.0], [1.0, 0.0]], -1.0),
        ([[1j, 0.0], [0.0, 2.0]], 2j),
        ([[1.0, 2.0], [2.0, 4.0]], 0.0),
    ],
)
def test_lu_det_complex(m, expected):
    assert lu_det_complex(m) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("n", range(1, 7))
def test_lu_det_complex_matches_cofactor_expansion(n):
    rng = numpy.random.default_rng(7 + n)
    m = rng.random((n, n)) + 1j * rng.random((n, n))

    assert lu_det_complex(m) == pytest.approx(cofactor_determinant(m), rel=1e-10)


def test_lu_det_complex_triangular():
    m = numpy.triu(numpy.arange(1, 17).reshape(4, 4)) * (1 + 1j)

    # (1 + i)^4 (1 * 6 * 11 * 16) = -4 * 1056
    assert lu_det_complex(m) == pytest.approx(-4224, rel=1e-15)
    assert cofactor_determinant(m) == pytest.approx(-4224)


def test_adjugate_identity():
    rng = numpy.random.default_rng(11)
    m = rng.random((4, 4)) + 1j * rng.random((4, 4))

    numpy.testing.assert_allclose(adjugate(m) @ m, lu_det_complex(m) * numpy.eye(4), atol=1e-12)


def test_solve_complex():
    rng = numpy.random.default_rng(3)
    m = rng.random((4, 4)) + 4 * numpy.eye(4)
    rhs = rng.random((4, 2))

    x = solve_complex(m, rhs)

    assert x.dtype == numpy.float64
    numpy.testing.assert_allclose(m @ x, rhs, atol=1e-13)


def test_solve_complex_complex_rhs():
    m = numpy.array([[2.0, 0.0], [0.0, 4.0]])
    x = solve_complex(m, numpy.array([2j, 4.0]))

    numpy.testing.assert_allclose(x, [1j, 1.0])


def test_solve_complex_singular():
    with pytest.raises(SingularMatrix):
        solve_complex([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0])


def test_right_solve():
    m = numpy.array([[3.0, 1.0], [1.0, 2.0]])
    x = numpy.array([[1.0, 2.0], [0.5, -1.0]])

    numpy.testing.assert_allclose(right_solve(x, m) @ m, x, atol=1e-14)
    numpy.testing.assert_allclose(right_solve(x[0], m) @ m, x[0], atol=1e-14)


def test_perron_pair_periodic_matrix():
    pair = perron_pair([[0.0, 1.0], [1.0, 0.0]])

    assert pair.value == pytest.approx(1.0, abs=1e-12)
    numpy.testing.assert_allclose(pair.left, [0.5, 0.5], atol=1e-12)
    numpy.testing.assert_allclose(pair.right, [1.0, 1.0], atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_perron_pair_random(seed):
    rng = numpy.random.default_rng(seed)
    m = rng.random((4, 4)) + 0.1

    pair = perron_pair(m)

    assert pair.value == pytest.approx(numpy.linalg.eigvals(m).real.max(), rel=1e-10)
    assert pair.left.sum() == pytest.approx(1.0)
    assert pair.left @ pair.right == pytest.approx(1.0)
    numpy.testing.assert_allclose(pair.left @ m, pair.value * pair.left, atol=1e-10)
    numpy.testing.assert_allclose(m @ pair.right, pair.value * pair.right, atol=1e-10)


def test_stationary_vector():
    pi = stationary_vector([[0.5, 0.5], [0.2, 0.8]])

    numpy.testing.assert_allclose(pi, [2 / 7, 5 / 7], atol=1e-14)


@pytest.mark.parametrize(
    "s, order, first",
    [(0.5, 1, 0), (0.5, 2, 0), (0.3, 3, 5), (-0.4 + 0.3j, 2, 2)],
)
def test_negative_binomial_tail_scalar(s, order, first):
    brute = sum(comb(k + order - 1, order - 1) * s**k for k in range(first, 400))

    assert negative_binomial_tail(s, order, first) == pytest.approx(brute, rel=1e-12)


def test_negative_binomial_tail_matrix():
    s = numpy.array([[0.2, 0.1], [0.05, 0.3]])
    brute = sum(
        (k + 1) * numpy.linalg.matrix_power(s, k) for k in range(3, 200)
    )

    numpy.testing.assert_allclose(negative_binomial_tail(s, 2, 3), brute, rtol=1e-12)


def test_matrix_power_series_head():
    coeffs = numpy.array([[[1.0]], [[2.0]]])

    assert matrix_power_series(coeffs, 3.0)[0, 0] == pytest.approx(7.0)


def test_matrix_power_series_tail():
    coeffs = numpy.zeros((2, 1, 1))
    tail = GeometricTail(start_index=1, ratio=0.5, coeff=numpy.ones((1, 1)))

    # Sum over k >= 2 of 0.5^k
    assert matrix_power_series(coeffs, 1.0, tail)[0, 0] == pytest.approx(0.5)

    with pytest.raises(OutsideRadius):
        matrix_power_series(coeffs, 2.0, tail)

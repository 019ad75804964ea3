"""Dense real and complex matrix arithmetic for phase-sized matrices."""
import cmath
import logging
import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy
import scipy.linalg

from mg1tail.exceptions import NoConvergence, OutsideRadius, SingularMatrix
from mg1tail.solver_parameters import (PERRON_MAX_ITERATIONS,
                                       PERRON_TOLERANCE, PIVOT_THRESHOLD)

logger = logging.getLogger(__name__)

# Roots of unity that are representable exactly
_EXACT_ROOTS = {
    Fraction(0): 1.0 + 0.0j,
    Fraction(1, 4): 0.0 + 1.0j,
    Fraction(1, 2): -1.0 + 0.0j,
    Fraction(3, 4): 0.0 - 1.0j,
}


@dataclass(frozen=True)
class PerronPair:
    """
    Perron-Frobenius eigenvalue of a nonnegative irreducible matrix with its
    left and right eigenvectors, normalized so that left.sum() == 1 and
    left @ right == 1.
    """

    value: float
    left: numpy.ndarray
    right: numpy.ndarray


def root_of_unity(angle: Fraction) -> complex:
    """Return exp(2 pi i angle) for an exact rational fraction of a turn."""

    angle = Fraction(angle) % 1

    if angle in _EXACT_ROOTS:
        return _EXACT_ROOTS[angle]

    return cmath.exp(2j * cmath.pi * float(angle))


def _lu_factor(m: numpy.ndarray):
    """LU factorization with partial pivoting, silencing singularity warnings."""

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        warnings.simplefilter("ignore", RuntimeWarning)
        return scipy.linalg.lu_factor(m, check_finite=False)


def lu_det_complex(m) -> complex:
    """
    Determinant of a square matrix from its partially pivoted LU factors.

    Parameters
    ----------
    m
        A square real or complex matrix.
    """

    m = numpy.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"lu_det_complex requires a square matrix, got {m.shape}")

    lu, piv = _lu_factor(m)
    swaps = numpy.count_nonzero(piv != numpy.arange(len(piv)))
    sign = -1.0 if swaps % 2 else 1.0

    return complex(sign * numpy.prod(numpy.diag(lu)))


def solve_complex(m, rhs, threshold: float = PIVOT_THRESHOLD) -> numpy.ndarray:
    """
    Solve m X = rhs by LU factorization. Real inputs give a real solution.

    Parameters
    ----------
    m
        A square matrix.
    rhs
        A vector or matrix with as many rows as m.
    threshold
        Relative pivot threshold. The smallest pivot must exceed
        threshold times the infinity norm of m.
    """

    m = numpy.asarray(m)
    rhs = numpy.asarray(rhs)
    dtype = numpy.result_type(m, rhs, float)

    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"solve_complex requires a square matrix, got {m.shape}")

    norm = numpy.abs(m).sum(axis=1).max()
    lu, piv = _lu_factor(m.astype(dtype))
    smallest_pivot = numpy.abs(numpy.diag(lu)).min()

    if not smallest_pivot > threshold * norm:
        raise SingularMatrix(
            f"smallest pivot {smallest_pivot:.3e} is below {threshold:.1e} "
            f"times the matrix norm {norm:.3e}"
        )

    return scipy.linalg.lu_solve((lu, piv), rhs.astype(dtype), check_finite=False)


def right_solve(x, m, threshold: float = PIVOT_THRESHOLD) -> numpy.ndarray:
    """Return x m^{-1} for a row vector or matrix x."""

    x = numpy.asarray(x)
    m = numpy.asarray(m)

    if x.ndim == 1:
        return solve_complex(m.T, x, threshold)

    return solve_complex(m.T, x.T, threshold).T


def _power_iteration(s: numpy.ndarray, tol: float, max_iterations: int):
    """Power iteration on a nonnegative matrix, vectors normalized to sum 1."""

    n = s.shape[0]
    x = numpy.full(n, 1.0 / n)
    estimate = 0.0

    for _ in range(max_iterations):
        y = s @ x
        new_estimate = y.sum()
        y = y / new_estimate

        converged = (
            abs(new_estimate - estimate) < tol * new_estimate
            and numpy.abs(y - x).max() < tol
        )
        x = y
        estimate = new_estimate

        if converged:
            return estimate, x

    raise NoConvergence(
        f"power iteration did not converge in {max_iterations} iterations"
    )


def perron_pair(
    m,
    tol: float = PERRON_TOLERANCE,
    max_iterations: int = PERRON_MAX_ITERATIONS,
) -> PerronPair:
    """
    Perron-Frobenius eigenpair of a nonnegative irreducible matrix.

    The matrix is scaled by its largest row sum and shifted by the identity
    before power iteration, so that periodic matrices have a unique dominant
    eigenvalue.

    Parameters
    ----------
    m
        A square, nonnegative, irreducible matrix.
    tol
        Convergence tolerance on successive eigenvalue estimates.
    max_iterations
        Iteration budget of each power iteration.
    """

    m = numpy.array(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"perron_pair requires a square matrix, got {m.shape}")

    n = m.shape[0]
    if n == 1:
        return PerronPair(float(m[0, 0]), numpy.ones(1), numpy.ones(1))

    scale = m.sum(axis=1).max()
    if not scale > 0:
        raise NoConvergence("perron_pair requires a nonzero matrix")

    shifted = m / scale + numpy.eye(n)
    _, right = _power_iteration(shifted, tol, max_iterations)
    _, left = _power_iteration(shifted.T, tol, max_iterations)

    left = left / left.sum()
    right = right / (left @ right)
    value = float(left @ m @ right)

    return PerronPair(value, left, right)


def stationary_vector(p) -> numpy.ndarray:
    """
    Stationary row vector of a stochastic matrix with a single recurrent class,
    computed as 1^T (I - P + e e^T)^{-1}.
    """

    p = numpy.asarray(p, dtype=float)
    n = p.shape[0]
    system = numpy.eye(n) - p + numpy.ones((n, n))
    pi = solve_complex(system.T, numpy.ones(n))

    return pi / pi.sum()


def negative_binomial_series(y, order: int, shift: int):
    """
    Sum over j >= 0 of binom(j + shift, order - 1) y^j in closed form.

    Uses binom(j + N, m - 1) = sum_i binom(j, i) binom(N, m - 1 - i) and
    sum_j binom(j, i) y^j = y^i (1 - y)^{-(i + 1)}. The argument y is a complex
    scalar or a square matrix; the closed form continues the series
    analytically wherever 1 - y is invertible.
    """

    if numpy.ndim(y) == 0:
        total = 0.0
        for i in range(order):
            total += comb(shift, order - 1 - i) * y**i / (1 - y) ** (i + 1)
        return total

    y = numpy.asarray(y)
    identity = numpy.eye(y.shape[0])
    resolvent = solve_complex(identity - y, identity)

    term = resolvent
    total = comb(shift, order - 1) * term
    for i in range(1, order):
        term = y @ term @ resolvent
        total = total + comb(shift, order - 1 - i) * term

    return total


def negative_binomial_tail(s, order: int, first: int):
    """
    Sum over k >= first of binom(k + order - 1, order - 1) s^k in closed form.
    The geometric series is the order 1 case. The argument s is a complex
    scalar or a square matrix.
    """

    series = negative_binomial_series(s, order, first + order - 1)

    if numpy.ndim(s) == 0:
        return s**first * series

    return numpy.linalg.matrix_power(numpy.asarray(s), first) @ series


def matrix_power_series(coeffs, z: complex, tail=None) -> numpy.ndarray:
    """
    Evaluate sum_k z^k coeffs[k] with an optional geometric tail.

    Parameters
    ----------
    coeffs
        Array of shape (K + 1, rows, cols) holding the explicit coefficients.
    z
        The complex argument.
    tail
        Optional tail with attributes start_index, ratio, and coeff, whose
        entries for k > start_index are coeff * ratio^k. The tail is summed in
        closed form.
    """

    coeffs = numpy.asarray(coeffs)
    result = numpy.zeros(coeffs.shape[1:], dtype=complex)

    # Horner evaluation of the explicit head
    for block in coeffs[::-1]:
        result = block + z * result

    if tail is not None:
        s = tail.ratio * z
        if abs(s) >= 1.0:
            raise OutsideRadius(
                f"|z| = {abs(z):.6g} is not inside the radius of convergence "
                f"{1.0 / tail.ratio:.6g}"
            )
        result = result + tail.coeff * negative_binomial_tail(
            s, 1, tail.start_index + 1
        )

    return result

"""
Fundamental matrices and the exact stationary distribution of an M/G/1-type
chain: G, U(k), U0(k), R(k), R0(k), the boundary vector x(0), Ramaswami's
recursion, and the normal forms of G and R.
"""
import logging
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Iterator, List, Tuple

import numpy
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from mg1tail.exceptions import NoConvergence, OutsideRadius, ShapeViolation
from mg1tail.linalg import (lu_det_complex, negative_binomial_series,
                            negative_binomial_tail, right_solve, root_of_unity,
                            solve_complex, stationary_vector)
from mg1tail.model import (A_block, B_block, DriftProfile, MG1Model, drift,
                           eval_A_star, eval_B_star, eval_Gamma_A_star,
                           require_stable)
from mg1tail.solver_parameters import (CONDITION_WARNING, DEFAULT_LEVELS,
                                       G_MAX_ITERATIONS, G_TOLERANCE)

logger = logging.getLogger(__name__)


class Subject(str, Enum):
    G_MATRIX = "G-matrix"
    R_MATRIX = "R-matrix"


class Form(str, Enum):
    IRREDUCIBLE = "irreducible"
    ONE_IRREDUCIBLE_PLUS_TRIANGULAR = "one-irreducible-plus-triangular"


@dataclass(frozen=True)
class StructureReport:
    """Strongly connected classes (0-based phases) and normal form of G or R."""

    subject: Subject
    classes: Tuple[Tuple[int, ...], ...]
    form: Form


@dataclass(frozen=True)
class FundamentalSet:
    """
    Fundamental matrices and the stationary prefix of a solved model.

    U, U0, R, and R0 are arrays indexed by level jump k = 0..k_max. U0[0] and
    R0[0] are unused zeros and R[0] = O. x holds the rows x(1), ..., x(K).
    """

    G: numpy.ndarray
    U: numpy.ndarray
    U0: numpy.ndarray
    R: numpy.ndarray
    R0: numpy.ndarray
    Kmat: numpy.ndarray
    kappa: numpy.ndarray
    x0: numpy.ndarray
    x: numpy.ndarray
    g_vec: numpy.ndarray
    condition: float

    @property
    def k_max(self) -> int:
        return len(self.U) - 1

    @property
    def k_levels(self) -> int:
        return len(self.x)

    def level(self, k: int) -> numpy.ndarray:
        """The stationary row vector x(k)."""

        return self.x0 if k == 0 else self.x[k - 1]


def _kernel_at(model: MG1Model, X: numpy.ndarray) -> numpy.ndarray:
    """Sum over k of A(k) X^k, the geometric tail in closed form."""

    value = numpy.zeros_like(X)
    for block in model.A[::-1]:
        value = block + value @ X

    if model.a_tail is not None:
        tail = model.a_tail
        value = value + tail.coeff @ negative_binomial_tail(
            tail.ratio * X, 1, tail.start_index + 1
        )

    return value


def iterate_G(model: MG1Model) -> Iterator[numpy.ndarray]:
    """Iterates X_{n+1} = sum_k A(k) X_n^k starting from X_0 = O."""

    X = numpy.zeros((model.M, model.M))
    while True:
        X = _kernel_at(model, X)
        yield X


def compute_G(
    model: MG1Model,
    tol: float = G_TOLERANCE,
    max_iterations: int = G_MAX_ITERATIONS,
) -> numpy.ndarray:
    """
    Minimal nonnegative solution of G = sum_k A(k) G^k by monotone fixed-point
    iteration from the zero matrix.

    Parameters
    ----------
    model
        A validated model.
    tol
        Iteration stops when successive iterates differ by less than tol
        entrywise.
    max_iterations
        Iteration budget.
    """

    logger.info(f"Computing G matrix for model {model.name}")

    previous = numpy.zeros((model.M, model.M))
    for iteration, G in enumerate(iterate_G(model), start=1):
        if numpy.abs(G - previous).max() < tol:
            logger.info(f"G matrix converged after {iteration} iterations")
            return G

        if iteration >= max_iterations:
            break

        previous = G

    raise NoConvergence(f"G iteration did not converge in {max_iterations} iterations")


def _b_tail_sum(model: MG1Model, G: numpy.ndarray, k: int) -> numpy.ndarray:
    """Sum over m >= k > K_B of B(m) G^(m - k) in closed form."""

    b_tail = model.b_tail
    total = numpy.zeros((model.M0, model.M), dtype=complex)

    for pole in b_tail.poles:
        s = pole.zeta.conjugate() / b_tail.radius
        total = total + s**k * pole.weight @ negative_binomial_series(
            s * G, b_tail.order, k + b_tail.order - 1
        )

    return total.real


def compute_URR0(model: MG1Model, G: numpy.ndarray, k_max: int = None):
    """
    U(k), U0(k), R(k), and R0(k) for k = 0..k_max.

    U(k) = sum_{m >= k+1} A(m) G^(m-k-1) and U0(k) = sum_{m >= k} B(m) G^(m-k)
    are computed by the backward recursions U(k) = A(k+1) + U(k+1) G and
    U0(k) = B(k) + U0(k+1) G from closed-form tail values.

    Parameters
    ----------
    model
        A validated model.
    G
        The G matrix.
    k_max
        Largest stored index. Default is the largest finite support index
        plus two.
    """

    if k_max is None:
        k_max = model.max_jump + 2

    M, M0 = model.M, model.M0
    identity = numpy.eye(M)

    # U(k) for k >= top is zero or in closed form
    if model.a_tail is not None:
        top = model.a_tail.start_index
        tail = model.a_tail
        resolvent = solve_complex(identity - tail.ratio * G, identity)
    else:
        top = len(model.A) - 1

    size = max(k_max, top) + 1
    U = numpy.zeros((size, M, M))

    if model.a_tail is not None:
        for k in range(top, size):
            U[k] = tail.coeff * tail.ratio ** (k + 1) @ resolvent

    for k in range(top - 1, -1, -1):
        U[k] = A_block(model, k + 1) + U[k + 1] @ G

    # U0(k) for k > top0 is zero or in closed form
    if model.b_tail is not None:
        top0 = model.b_tail.start_index
    else:
        top0 = len(model.B)

    size0 = max(k_max, top0 + 1) + 1
    U0 = numpy.zeros((size0, M0, M))

    if model.b_tail is not None:
        for k in range(top0 + 1, size0):
            U0[k] = _b_tail_sum(model, G, k)

    for k in range(top0, 0, -1):
        U0[k] = B_block(model, k) + U0[k + 1] @ G

    U = U[: k_max + 1]
    U0 = U0[: k_max + 1]

    inverse = solve_complex(identity - U[0], identity)
    R = U @ inverse
    R[0] = 0.0
    R0 = U0 @ inverse
    R0[0] = 0.0

    return U, U0, R, R0


def boundary_solve(
    model: MG1Model,
    G: numpy.ndarray,
    U: numpy.ndarray,
    U0: numpy.ndarray,
    drift_profile: DriftProfile = None,
):
    """
    The boundary matrix K = B(0) + U0(1) (I - U(0))^{-1} C(0), its stationary
    vector kappa, and the boundary probability vector x(0).

    Returns
    -------
    Kmat, kappa, x0
    """

    if drift_profile is None:
        drift_profile = drift(model)

    M = model.M
    identity = numpy.eye(M)
    ones = numpy.ones(M)

    R0_1 = right_solve(U0[1], identity - U[0])
    Kmat = model.B0 + R0_1 @ model.C0
    kappa = stationary_vector(Kmat)

    A = eval_A_star(model, 1.0).real
    B = eval_B_star(model, 1.0).real
    deviation = solve_complex(identity - A + numpy.outer(ones, drift_profile.pi), drift_profile.beta_A)
    bracket = drift_profile.beta_B + (B - U0[1] @ G) @ deviation
    x0 = kappa / (1.0 + kappa @ bracket / (1.0 - drift_profile.rho))

    return Kmat, kappa, x0


def ramaswami(model: MG1Model, fund: FundamentalSet, k_levels: int) -> numpy.ndarray:
    """
    Stationary vectors x(1), ..., x(k_levels) by the forward recursion
    x(k) = x(0) R0(k) + sum_{j=1}^{k-1} x(j) R(k - j).
    """

    if k_levels > fund.k_max:
        raise ValueError(
            f"k_levels {k_levels} exceeds the stored R sequences (k_max {fund.k_max})"
        )

    x = numpy.zeros((k_levels, model.M))
    for k in range(1, k_levels + 1):
        value = fund.x0 @ fund.R0[k]
        if k > 1:
            value = value + numpy.einsum("jm,jmn->n", x[: k - 1], fund.R[k - 1 : 0 : -1])
        x[k - 1] = value

    return x


def solve_fundamental(
    model: MG1Model,
    k_levels: int = DEFAULT_LEVELS,
    g_tolerance: float = G_TOLERANCE,
    drift_profile: DriftProfile = None,
) -> FundamentalSet:
    """
    Compute G, U, U0, R, R0, the boundary quantities, and the stationary prefix
    x(1..k_levels).

    Parameters
    ----------
    model
        A validated model with rho < 1.
    k_levels
        Number of levels of the stationary prefix.
    g_tolerance
        Convergence tolerance of the G iteration.
    drift_profile
        Precomputed drift of the model.
    """

    if drift_profile is None:
        drift_profile = drift(model)

    require_stable(drift_profile)

    G = compute_G(model, g_tolerance)
    U, U0, R, R0 = compute_URR0(model, G, max(k_levels, model.max_jump + 2))

    condition = float(numpy.linalg.cond(numpy.eye(model.M) - U[0]))
    if condition > CONDITION_WARNING:
        logger.warning(f"I - U(0) is ill conditioned (condition number {condition:.3e})")

    Kmat, kappa, x0 = boundary_solve(model, G, U, U0, drift_profile)

    fund = FundamentalSet(
        G=G,
        U=U,
        U0=U0,
        R=R,
        R0=R0,
        Kmat=Kmat,
        kappa=kappa,
        x0=x0,
        x=numpy.zeros((0, model.M)),
        g_vec=stationary_vector(G),
        condition=condition,
    )

    logger.info(f"Running Ramaswami recursion for {k_levels} levels")
    x = ramaswami(model, fund, k_levels)

    mass = x0.sum() + x.sum()
    if mass > 1 + 1e-9:
        logger.warning(f"stationary prefix has total mass {mass:.12f} above one")

    return replace(fund, x=x)


def pi_star(
    model: MG1Model, fund: FundamentalSet, drift_profile: DriftProfile = None
) -> numpy.ndarray:
    """
    Closed form of sum_{k >= 1} x(k):

        [x(0){B + beta_B g} - x(1) A(0)] (I - A + (e - beta_A) g)^{-1}
    """

    if drift_profile is None:
        drift_profile = drift(model)

    M = model.M
    g = fund.g_vec
    A = eval_A_star(model, 1.0).real
    B = eval_B_star(model, 1.0).real

    lhs = fund.x0 @ (B + numpy.outer(drift_profile.beta_B, g)) - fund.x[0] @ model.A[0]
    system = numpy.eye(M) - A + numpy.outer(numpy.ones(M) - drift_profile.beta_A, g)

    return right_solve(lhs, system)


def R_star(model: MG1Model, fund: FundamentalSet, z: complex) -> numpy.ndarray:
    """R*(z) = sum_{k >= 1} z^k R(k), the geometric tail in closed form."""

    if abs(z) >= model.r_A:
        raise OutsideRadius(f"|z| = {abs(z):.6g} is not inside r_A = {model.r_A:.6g}")

    M = model.M
    identity = numpy.eye(M)

    if model.a_tail is not None:
        tail = model.a_tail
        first = max(1, tail.start_index)
        resolvent = solve_complex(identity - tail.ratio * fund.G, identity)
        U_star = (
            tail.coeff
            * tail.ratio
            * negative_binomial_tail(tail.ratio * z, 1, first)
            @ resolvent
        )
    else:
        first = len(model.A) - 1
        U_star = numpy.zeros((M, M), dtype=complex)

    for k in range(first - 1, 0, -1):
        U_star = U_star + z**k * fund.U[k]

    return right_solve(U_star, identity - fund.U[0])


def rg_factorization_residual(model: MG1Model, fund: FundamentalSet, z: complex) -> float:
    """
    Infinity norm of (I - Gamma_A*(z)) - (I - R*(z))(I - U(0))(I - G/z).
    """

    identity = numpy.eye(model.M)
    lhs = identity - eval_Gamma_A_star(model, z)
    rhs = (identity - R_star(model, fund, z)) @ (identity - fund.U[0]) @ (identity - fund.G / z)

    return float(numpy.abs(lhs - rhs).sum(axis=1).max())


def balance_residual(model: MG1Model, fund: FundamentalSet) -> float:
    """
    Largest residual of x(k) = x(0)B(k) + sum_{l=1}^{k+1} x(l) A(k+1-l) over
    k = 1..K-1.
    """

    K = fund.k_levels
    A_blocks = numpy.array([A_block(model, j) for j in range(K + 1)])

    residual = 0.0
    for k in range(1, K):
        # x(l) A(k + 1 - l) for l = 1..k+1
        inflow = numpy.einsum("lm,lmn->n", fund.x[: k + 1], A_blocks[k::-1])
        value = fund.x[k - 1] - fund.x0 @ B_block(model, k) - inflow
        residual = max(residual, numpy.abs(value).max())

    return float(residual)


def r_kernel_period_check(model: MG1Model, fund: FundamentalSet, spectral) -> List[Tuple[int, float]]:
    """
    |det(I - R*(theta w^nu))| for nu = 0..tau-1 with w = exp(2 pi i / tau).
    All values vanish when the period of the R kernel equals tau.
    """

    identity = numpy.eye(model.M)
    checks = list()
    for nu in range(spectral.tau):
        z = spectral.theta * root_of_unity(Fraction(nu, spectral.tau))
        checks.append((nu, abs(lu_det_complex(identity - R_star(model, fund, z)))))

    return checks


def structure_normal_form(m, subject: Subject) -> StructureReport:
    """
    Classify the support graph of G or R into an irreducible matrix or one
    irreducible class plus a strictly triangular remainder.

    Parameters
    ----------
    m
        A nonnegative square matrix.
    subject
        Whether m is a G matrix (the irreducible class is closed) or an R
        matrix (the irreducible class has no incoming edges).
    """

    subject = Subject(subject)
    support = numpy.asarray(m) > 0
    n_classes, labels = connected_components(
        csr_matrix(support), directed=True, connection="strong"
    )
    classes = tuple(
        tuple(int(i) for i in numpy.flatnonzero(labels == label)) for label in range(n_classes)
    )

    nontrivial = [
        members for members in classes if len(members) > 1 or support[members[0], members[0]]
    ]

    if len(nontrivial) != 1:
        raise ShapeViolation(
            f"{subject.value} has {len(nontrivial)} nontrivial classes, expected one"
        )

    if n_classes == 1:
        return StructureReport(subject, classes, Form.IRREDUCIBLE)

    inside = numpy.zeros(len(support), dtype=bool)
    inside[list(nontrivial[0])] = True

    if subject == Subject.G_MATRIX and support[inside][:, ~inside].any():
        raise ShapeViolation("the irreducible class of the G matrix is not closed")

    if subject == Subject.R_MATRIX and support[~inside][:, inside].any():
        raise ShapeViolation("the irreducible class of the R matrix has incoming edges")

    return StructureReport(subject, classes, Form.ONE_IRREDUCIBLE_PLUS_TRIANGULAR)

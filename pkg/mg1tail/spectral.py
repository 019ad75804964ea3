"""
The decay parameter theta, the Perron curve y -> delta(A*(y)), the Perron
vectors at theta, and the period of the additive kernel Gamma_A(k) = A(k + 1).
"""
import logging
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy

from mg1tail.exceptions import OutsideRadius, PeriodUndefined, ValidationError
from mg1tail.linalg import lu_det_complex, perron_pair, root_of_unity
from mg1tail.model import (DriftProfile, MG1Model, drift, eval_A_star,
                           eval_A_star_derivative, eval_Gamma_A_star,
                           gamma_A_support)
from mg1tail.solver_parameters import (FINITE_DIFFERENCE_STEP,
                                       PERIOD_DETERMINANT_TOLERANCE,
                                       PERRON_TOLERANCE, THETA_BOUNDARY_STEPS,
                                       THETA_GRID_POINTS, THETA_RADIUS_CAP,
                                       THETA_RADIUS_MARGIN, THETA_TOLERANCE)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralProfile:
    """
    Spectral data of the kernel A: theta (None when no root exists), the
    convergence radii, the drift, the Perron vectors of Gamma_A*(theta)
    normalized by mu e = 1 and mu v = 1, the derivative of delta(A*(y)) at
    theta, the period tau with 0-based phase offsets, and the determinant
    cross-check of the period.
    """

    theta: Optional[float]
    r_A: float
    r_B: float
    rho: float
    mu: Optional[numpy.ndarray]
    v: Optional[numpy.ndarray]
    delta_prime: Optional[float]
    tau: int
    offsets: numpy.ndarray
    period_checks: Tuple[Tuple[int, float], ...] = ()


def perron_curve(model: MG1Model, y: float, tol: float = PERRON_TOLERANCE) -> float:
    """delta(A*(y)), the Perron-Frobenius eigenvalue of A*(y) for 0 < y < r_A."""

    if not 0 < y < model.r_A:
        raise OutsideRadius(f"y = {y:.6g} is not in (0, r_A = {model.r_A:.6g})")

    return perron_pair(eval_A_star(model, y).real, tol).value


def find_theta(
    model: MG1Model,
    tol: float = THETA_TOLERANCE,
    perron_tol: float = PERRON_TOLERANCE,
) -> Optional[float]:
    """
    Root theta in (1, r_A) of delta(A*(theta)) = theta, or None if none exists.

    f(y) = delta(A*(y)) - y vanishes at y = 1 and decreases there when rho < 1.
    The first sign change of f on a geometric grid toward r_A is bisected to
    relative tolerance tol. For finite r_A the points r_A (1 - 2^-j) are also
    scanned before declaring that no root exists.

    Parameters
    ----------
    model
        A validated model with rho < 1.
    tol
        Relative bisection tolerance.
    perron_tol
        Tolerance of the Perron eigenvalue evaluations.
    """

    def f(y):
        return perron_curve(model, y, perron_tol) - y

    upper = min(THETA_RADIUS_CAP, model.r_A * (1 - THETA_RADIUS_MARGIN))
    lower = 1.0
    bracket = None

    for i in range(1, THETA_GRID_POINTS + 1):
        y = math.exp(i * math.log(upper) / THETA_GRID_POINTS)
        if f(y) >= 0:
            bracket = (lower, y)
            break
        lower = y

    if bracket is None and math.isfinite(model.r_A):
        for j in range(1, THETA_BOUNDARY_STEPS + 1):
            y = model.r_A * (1 - 2.0**-j)
            if y <= lower:
                continue
            if f(y) >= 0:
                bracket = (lower, y)
                break
            lower = y

    if bracket is None:
        logger.info(f"delta(A*(y)) < y on (1, r_A) for model {model.name}")
        return None

    lower, upper = bracket
    while upper - lower > tol * upper:
        middle = 0.5 * (lower + upper)
        if f(middle) < 0:
            lower = middle
        else:
            upper = middle

    return 0.5 * (lower + upper)


def eigen_at_theta(model: MG1Model, theta: float, tol: float = PERRON_TOLERANCE):
    """
    Perron vectors of Gamma_A*(theta) and the derivative of delta(A*(y)) at
    theta, computed as mu A*'(theta) v.

    Returns
    -------
    mu, v, delta_prime
    """

    pair = perron_pair(eval_Gamma_A_star(model, theta).real, tol)
    delta_prime = float(pair.left @ eval_A_star_derivative(model, theta).real @ pair.right)

    return pair.left, pair.right, delta_prime


def delta_prime_finite_difference(
    model: MG1Model, theta: float, step: float = FINITE_DIFFERENCE_STEP
) -> float:
    """Central difference of delta(A*(y)) at theta."""

    return (perron_curve(model, theta + step) - perron_curve(model, theta - step)) / (2 * step)


def madp_period(
    support: List[Tuple[int, int, int]], n_phases: int = None
) -> Tuple[int, numpy.ndarray]:
    """
    Period of an additive kernel from its support and the phase offsets.

    A spanning tree from phase 0 assigns potentials phi(j); the period is the
    gcd over all support edges (i, j, w) of |w - (phi(j) - phi(i))| and the
    offsets are phi(j) mod period.

    Parameters
    ----------
    support
        Triples (i, j, displacement) with 0-based phases.
    n_phases
        Number of phases. Default is one more than the largest phase index.
    """

    if n_phases is None:
        n_phases = 1 + max(max(i, j) for i, j, _ in support)

    edges: Dict[int, List[Tuple[int, int]]] = {i: list() for i in range(n_phases)}
    for i, j, w in support:
        edges[i].append((j, w))

    potential = {0: 0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j, w in edges[i]:
            if j not in potential:
                potential[j] = potential[i] + w
                queue.append(j)

    if len(potential) < n_phases:
        raise ValidationError("A not irreducible")

    period = 0
    for i, j, w in support:
        period = math.gcd(period, abs(w - (potential[j] - potential[i])))

    if period == 0:
        raise PeriodUndefined("every cycle of Gamma_A has zero displacement")

    offsets = numpy.array([potential[j] % period for j in range(n_phases)], dtype=int)

    return period, offsets


def period_spectral_check(
    model: MG1Model, theta: float, tau: int = None
) -> List[Tuple[int, float]]:
    """
    |det(I - Gamma_A*(theta exp(2 pi i / n)))| for n = 1..M. The determinant
    vanishes exactly for the n that divide tau.
    """

    identity = numpy.eye(model.M)
    checks = list()

    for n in range(1, model.M + 1):
        z = theta * root_of_unity(Fraction(1, n))
        checks.append((n, abs(lu_det_complex(identity - eval_Gamma_A_star(model, z)))))

    if tau is not None and tau <= model.M:
        vanishing = [n for n, determinant in checks if determinant < PERIOD_DETERMINANT_TOLERANCE]
        if not vanishing or max(vanishing) != tau:
            logger.warning(f"spectral period check disagrees with graph period tau = {tau}")

    return checks


def spectral_period(
    checks: List[Tuple[int, float]], tol: float = PERIOD_DETERMINANT_TOLERANCE
) -> int:
    """
    Largest n whose determinant in period_spectral_check is below tol.

    Raises PeriodUndefined if no determinant is below tol, which includes an
    empty list of checks.
    """

    period = max((n for n, determinant in checks if determinant < tol), default=None)

    if period is None:
        smallest = min((determinant for _, determinant in checks), default=None)
        raise PeriodUndefined(
            f"no determinant of I - Gamma_A*(theta w) is below {tol:.1e}", smallest
        )

    return period


def offset_matrix(offsets: numpy.ndarray, angle: Fraction) -> numpy.ndarray:
    """Delta_M(w) = diag(w^-p(j)) for w = exp(2 pi i angle)."""

    angle = Fraction(angle)
    return numpy.diag([root_of_unity(-angle * int(p)) for p in offsets])


def rotated_perron_vectors(spectral: SpectralProfile, angle: Fraction):
    """
    Perron vectors of Gamma_A*(theta w) for w = exp(2 pi i angle) with
    w^tau = 1: mu Delta_M(w)^{-1} and Delta_M(w) v.
    """

    delta = numpy.diag(offset_matrix(spectral.offsets, angle))
    return spectral.mu / delta, delta * spectral.v


def spectral_profile(
    model: MG1Model,
    drift_profile: DriftProfile = None,
    theta_tol: float = THETA_TOLERANCE,
    perron_tol: float = PERRON_TOLERANCE,
) -> SpectralProfile:
    """
    Compute theta, the Perron data at theta, and the period of the kernel.

    Parameters
    ----------
    model
        A validated model with rho < 1.
    drift_profile
        Precomputed drift of the model.
    theta_tol
        Relative bisection tolerance for theta.
    perron_tol
        Tolerance of the Perron eigenvalue evaluations.
    """

    if drift_profile is None:
        drift_profile = drift(model)

    logger.info(f"Computing spectral profile for model {model.name}")

    tau, offsets = madp_period(gamma_A_support(model), model.M)
    theta = find_theta(model, theta_tol, perron_tol)

    mu = v = delta_prime = None
    checks = ()
    if theta is not None:
        mu, v, delta_prime = eigen_at_theta(model, theta, perron_tol)
        checks = tuple(period_spectral_check(model, theta, tau))

    return SpectralProfile(
        theta=theta,
        r_A=model.r_A,
        r_B=model.r_B,
        rho=drift_profile.rho,
        mu=mu,
        v=v,
        delta_prime=delta_prime,
        tau=tau,
        offsets=offsets,
        period_checks=checks,
    )

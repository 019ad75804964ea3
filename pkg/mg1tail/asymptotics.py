"""
Regime classification and prefactors of the tail probabilities
x_bar(k) = sum_{l > k} x(l).

Every supported regime is summarized by a pole expansion on the dominant
circle: the tail behaves like

    x_bar(k) ~ binom(k + order - 1, order - 1) base^-k sum_j w_j^-k L_j

where w_j = exp(2 pi i angle_j) and L_j are row vectors. The angles are exact
fractions, so the sum over poles is periodic in k and reduces to one
prefactor vector per residue class.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy

from mg1tail.exceptions import (EmptyIntersection, PositivityViolation,
                                UnsupportedRegime, ValidationError)
from mg1tail.fundamental import FundamentalSet
from mg1tail.linalg import (negative_binomial_tail, right_solve,
                            root_of_unity)
from mg1tail.model import (DriftProfile, MG1Model, drift, eval_B_star,
                           eval_Gamma_A_star)
from mg1tail.solver_parameters import AT_RB_TOLERANCE, ZERO_TOLERANCE
from mg1tail.spectral import SpectralProfile, rotated_perron_vectors

logger = logging.getLogger(__name__)

# Relative size of the imaginary part tolerated in real prefactors
IMAGINARY_TOLERANCE = 1e-10


class Regime(str, Enum):
    BELOW_RB = "BelowRB"
    ABOVE_RB = "AboveRB"
    AT_RB = "AtRB"
    NO_THETA_ABOVE_RB = "NoThetaAboveRB"
    UNSUPPORTED = "Unsupported"


@dataclass(frozen=True)
class PoleExpansion:
    """
    Dominant poles radius * exp(2 pi i angle) of common order with the
    limits (1 - z / sigma)^order f(z) -> weight at each pole sigma.
    """

    radius: float
    angles: Tuple[Fraction, ...]
    order: int
    weights: Tuple

    @property
    def locations(self) -> List[complex]:
        return [self.radius * root_of_unity(angle) for angle in self.angles]

    @property
    def period(self) -> int:
        return math.lcm(*[angle.denominator for angle in self.angles])


@dataclass(frozen=True)
class AsymptoticReport:
    """
    Regime, decay base, period, pole order, and one prefactor vector per
    residue class, so that

        x_bar(n period + l) ~ binom(k + order - 1, order - 1) base^-k prefactors[l]

    with k = n period + l. Unsupported reports carry no prefactors.
    """

    regime: Regime
    decay_base: Optional[float] = None
    period: Optional[int] = None
    order: Optional[int] = None
    prefactors: Dict[int, numpy.ndarray] = field(default_factory=dict)
    expansion: Optional[PoleExpansion] = None
    diagnostics: Dict = field(default_factory=dict)


def classify_regime(
    model: MG1Model, spectral: SpectralProfile, at_rb_tol: float = AT_RB_TOLERANCE
) -> Regime:
    """Compare theta with the convergence radius r_B of B*(z)."""

    theta = spectral.theta
    has_b_tail = model.b_tail is not None

    if theta is None:
        if has_b_tail and model.r_A > model.r_B:
            return Regime.NO_THETA_ABOVE_RB
        return Regime.UNSUPPORTED

    if has_b_tail and abs(theta - model.r_B) <= at_rb_tol * theta:
        return Regime.AT_RB

    if theta < model.r_B:
        return Regime.BELOW_RB

    if has_b_tail:
        return Regime.ABOVE_RB

    return Regime.UNSUPPORTED


def _require_theta(spectral: SpectralProfile):
    if spectral.theta is None:
        raise UnsupportedRegime("theta does not exist")


def residue_inverse_at(model: MG1Model, spectral: SpectralProfile, nu: int) -> numpy.ndarray:
    """
    Limit of (1 - z / (theta w)) [I - Gamma_A*(z)]^{-1} as z -> theta w for
    w = exp(2 pi i nu / tau): the rank-one matrix
    Delta_M(w) v mu Delta_M(w)^{-1} / (delta' - 1).
    """

    _require_theta(spectral)

    mu, v = rotated_perron_vectors(spectral, Fraction(nu, spectral.tau))
    return numpy.outer(v, mu) / (spectral.delta_prime - 1)


def _numerator(model: MG1Model, fund: FundamentalSet, z: complex) -> numpy.ndarray:
    """x(0) B*(z) - x(1) A(0), the numerator of x*(z) = sum_{k >= 1} z^k x(k)."""

    return fund.x0 @ eval_B_star(model, z) - fund.level(1) @ model.A[0]


def _c_from_numerator(spectral: SpectralProfile, nu: int, numerator) -> complex:
    angle = Fraction(nu, spectral.tau)
    sigma = spectral.theta * root_of_unity(angle)
    _, v = rotated_perron_vectors(spectral, angle)

    return complex(numerator @ v / ((sigma - 1) * (spectral.delta_prime - 1)))


def c_omega(model: MG1Model, spectral: SpectralProfile, fund: FundamentalSet, nu: int) -> complex:
    """
    Residue scalar c(w) = [x(0)B*(theta w) - x(1)A(0)] Delta_M(w) v
    / ((theta w - 1)(delta' - 1)) for w = exp(2 pi i nu / tau).

    Raises PositivityViolation if c(1) is not positive.
    """

    _require_theta(spectral)

    sigma = spectral.theta * root_of_unity(Fraction(nu, spectral.tau))
    value = _c_from_numerator(spectral, nu, _numerator(model, fund, sigma))

    if nu % spectral.tau == 0 and not value.real > 0:
        raise PositivityViolation(f"c(1) = {value:.6g} is not positive")

    return value


def _refined_period(tau: int, kept: List[int]) -> int:
    """tau / gcd of the kept residue classes and tau."""

    return tau // math.gcd(tau, *kept)


def _kept_classes(c_values: Dict[int, complex], zero_tol: float) -> List[int]:
    threshold = zero_tol * abs(c_values[0])
    return sorted(nu for nu, c in c_values.items() if nu == 0 or abs(c) > threshold)


def _real_prefactors(
    expansion: PoleExpansion, check_positive: bool = True
) -> Dict[int, numpy.ndarray]:
    """Sum the pole weights per residue class and check them real and positive."""

    prefactors = dict()

    for l in range(expansion.period):
        value = sum(
            weight * root_of_unity(-angle * l)
            for angle, weight in zip(expansion.angles, expansion.weights)
        )
        value = numpy.atleast_1d(value)
        scale = max(1.0, numpy.abs(value).max())
        if numpy.abs(value.imag).max() > IMAGINARY_TOLERANCE * scale:
            raise PositivityViolation(
                f"prefactor of residue class {l} is not real "
                f"(imaginary part {numpy.abs(value.imag).max():.3e})"
            )
        if check_positive and not value.real.min() > 0:
            raise PositivityViolation(
                f"prefactor of residue class {l} is not positive "
                f"(smallest entry {value.real.min():.6g})"
            )
        prefactors[l] = value.real

    return prefactors


def _below_expansion(
    spectral: SpectralProfile, c_values: Dict[int, complex], kept: List[int]
) -> PoleExpansion:
    """Simple poles theta w at the kept classes with weights c(w) mu Delta_M(w)^{-1}."""

    angles = list()
    weights = list()
    for nu in kept:
        angle = Fraction(nu, spectral.tau)
        mu, _ = rotated_perron_vectors(spectral, angle)
        angles.append(angle)
        weights.append(c_values[nu] * mu)

    return PoleExpansion(
        radius=spectral.theta, angles=tuple(angles), order=1, weights=tuple(weights)
    )


def _below_from_numerators(
    spectral: SpectralProfile, numerators: Dict[int, numpy.ndarray], zero_tol: float
):
    """c(w) for every class, the kept classes, tau', and the pole expansion."""

    c_values = {
        nu: _c_from_numerator(spectral, nu, numerator) for nu, numerator in numerators.items()
    }
    if not c_values[0].real > 0:
        raise PositivityViolation(f"c(1) = {c_values[0]:.6g} is not positive")

    kept = _kept_classes(c_values, zero_tol)
    tau_prime = _refined_period(spectral.tau, kept)

    perturbed = _refined_period(spectral.tau, _kept_classes(c_values, 10 * zero_tol))
    if perturbed != tau_prime:
        logger.warning(
            f"tau' changes from {tau_prime} to {perturbed} when the zero "
            f"tolerance is raised to {10 * zero_tol:.1e}"
        )

    return c_values, kept, tau_prime, _below_expansion(spectral, c_values, kept)


def _numerators_below(model: MG1Model, spectral: SpectralProfile, fund: FundamentalSet):
    return {
        nu: _numerator(model, fund, spectral.theta * root_of_unity(Fraction(nu, spectral.tau)))
        for nu in range(spectral.tau)
    }


def prefactors_below(
    model: MG1Model,
    spectral: SpectralProfile,
    fund: FundamentalSet,
    zero_tol: float = ZERO_TOLERANCE,
) -> Tuple[int, Dict[int, numpy.ndarray]]:
    """
    Refined period tau' and prefactors c'_l, l = 0..tau'-1, for theta < r_B.

    Residue classes nu with |c(w^nu)| <= zero_tol |c(1)| are dropped; tau' is
    tau divided by the gcd of the remaining classes, and

        c'_l = sum over kept nu of c(w^nu) mu Delta_M(w^nu)^{-1} w^{-nu l}

    Parameters
    ----------
    model
        A validated model with rho < 1.
    spectral
        Its spectral profile. Theta must exist.
    fund
        The solved fundamental set.
    zero_tol
        Relative tolerance for declaring c(w) zero.
    """

    _require_theta(spectral)

    _, _, tau_prime, expansion = _below_from_numerators(
        spectral, _numerators_below(model, spectral, fund), zero_tol
    )

    return tau_prime, _real_prefactors(expansion)


def prefactors_reduced_boundary(
    model: MG1Model,
    spectral: SpectralProfile,
    fund: FundamentalSet,
    zero_tol: float = ZERO_TOLERANCE,
) -> Tuple[int, Dict[int, numpy.ndarray]]:
    """
    prefactors_below for models with C(0) = A(0), where the balance equation
    of level 0 gives x(1)A(0) = x(0)(I - B(0)).
    """

    _require_theta(spectral)

    if model.M0 != model.M or not numpy.allclose(model.C0, model.A[0], rtol=0, atol=1e-14):
        raise ValidationError("C(0) != A(0)")

    identity = numpy.eye(model.M)
    numerators = dict()
    for nu in range(spectral.tau):
        sigma = spectral.theta * root_of_unity(Fraction(nu, spectral.tau))
        numerators[nu] = fund.x0 @ (eval_B_star(model, sigma) - identity + model.B0)

    _, _, tau_prime, expansion = _below_from_numerators(spectral, numerators, zero_tol)

    return tau_prime, _real_prefactors(expansion)


def prefactors_skip_free(
    model: MG1Model,
    spectral: SpectralProfile,
    fund: FundamentalSet,
    drift_profile: DriftProfile = None,
    zero_tol: float = ZERO_TOLERANCE,
) -> Tuple[int, Dict[int, numpy.ndarray]]:
    """
    prefactors_below for models with B(k) = A(k) for all k and C(0) = A(0).
    Then x(0) = (1 - rho) g and c(w) = (1 - rho) g Delta_M(w) v / (delta' - 1).
    """

    _require_theta(spectral)

    if drift_profile is None:
        drift_profile = drift(model)

    same_blocks = (
        model.M0 == model.M
        and model.a_tail is None
        and model.b_tail is None
        and len(model.B) == len(model.A) - 1
        and numpy.array_equal(model.B0, model.A[0])
        and numpy.array_equal(model.B, model.A[1:])
        and numpy.array_equal(model.C0, model.A[0])
    )
    if not same_blocks:
        raise ValidationError("B(k) != A(k) or C(0) != A(0)")

    x0 = (1 - drift_profile.rho) * fund.g_vec
    c_values = dict()
    for nu in range(spectral.tau):
        _, v = rotated_perron_vectors(spectral, Fraction(nu, spectral.tau))
        c_values[nu] = complex(x0 @ v / (spectral.delta_prime - 1))

    kept = _kept_classes(c_values, zero_tol)
    expansion = _below_expansion(spectral, c_values, kept)

    return _refined_period(spectral.tau, kept), _real_prefactors(expansion)


def _above_expansion(model: MG1Model, fund: FundamentalSet) -> PoleExpansion:
    """
    Poles r_B zeta_n of order m_B with weights
    x(0) W_n [I - Gamma_A*(r_B zeta_n)]^{-1} / (r_B zeta_n - 1).
    """

    b_tail = model.b_tail
    identity = numpy.eye(model.M)

    weights = list()
    for pole in b_tail.poles:
        sigma = b_tail.radius * pole.zeta
        row = fund.x0 @ pole.weight / (sigma - 1)
        weights.append(right_solve(row, identity - eval_Gamma_A_star(model, sigma)))

    return PoleExpansion(
        radius=b_tail.radius,
        angles=tuple(pole.angle for pole in b_tail.poles),
        order=b_tail.order,
        weights=tuple(weights),
    )


def prefactors_above(model: MG1Model, fund: FundamentalSet) -> PoleExpansion:
    """
    Pole expansion of x_bar(k) when the boundary tail dominates (theta > r_B,
    or no theta with r_A > r_B). The weight at angle 0 must be positive.
    """

    if model.b_tail is None:
        raise UnsupportedRegime("no b_tail pole specification")

    expansion = _above_expansion(model, fund)

    leading = expansion.weights[expansion.angles.index(Fraction(0))]
    if not (leading.real.min() > 0):
        raise PositivityViolation(
            f"weight of the pole at r_B is not positive (smallest entry {leading.real.min():.6g})"
        )

    return expansion


def _b_bar(model: MG1Model, k: int) -> numpy.ndarray:
    """B_bar(k) = sum_{l > k} B(l)."""

    total = numpy.zeros((model.M0, model.M), dtype=complex)
    for l in range(k + 1, len(model.B) + 1):
        total = total + model.B[l - 1]

    b_tail = model.b_tail
    if b_tail is not None:
        first = max(k, b_tail.start_index) + 1
        for pole in b_tail.poles:
            s = pole.zeta.conjugate() / b_tail.radius
            total = total + pole.weight * negative_binomial_tail(s, b_tail.order, first)

    return total.real


def boundary_tail_prediction(model: MG1Model, fund: FundamentalSet, k: int) -> numpy.ndarray:
    """
    Single-pole prediction x(0) B_bar(k) [I - Gamma_A*(r_B)]^{-1} of x_bar(k)
    for a boundary tail with one simple pole at r_B.
    """

    b_tail = model.b_tail
    if b_tail is None or len(b_tail.poles) != 1 or b_tail.order != 1:
        raise UnsupportedRegime("single-pole prediction needs one simple pole at r_B")

    identity = numpy.eye(model.M)
    system = identity - eval_Gamma_A_star(model, b_tail.radius).real

    return right_solve(fund.x0 @ _b_bar(model, k), system)


def prefactors_at(
    model: MG1Model,
    spectral: SpectralProfile,
    fund: FundamentalSet,
    zero_tol: float = ZERO_TOLERANCE,
):
    """
    Period bound tau_hat and prefactors c_hat_l for theta = r_B.

    Classes nu/tau that coincide with a pole angle of B*(z) are kept without
    evaluating c(w), since B*(theta w) is singular there. The remaining classes
    are kept when |c(w)| > zero_tol |c(1)|. The poles of order m_B + 1 sit at
    the kept angles that are also pole angles of B*(z), with weights

        x(0) W_n Delta_M(w) v mu Delta_M(w)^{-1} / ((theta w - 1)(delta' - 1))

    Returns
    -------
    tau_prime, tau_hat, expansion, prefactors, diagnostics
    """

    _require_theta(spectral)

    if model.b_tail is None:
        raise UnsupportedRegime("no b_tail pole specification")

    tau = spectral.tau
    pole_weights = {pole.angle: pole.weight for pole in model.b_tail.poles}

    c_values = dict()
    kept = list()
    for nu in range(tau):
        angle = Fraction(nu, tau)
        if angle in pole_weights:
            kept.append(nu)
            continue
        sigma = spectral.theta * root_of_unity(angle)
        c_values[nu] = _c_from_numerator(spectral, nu, _numerator(model, fund, sigma))

    # c(1) is singular, so the scale of the residues is set by the leading weight
    scale = numpy.abs(fund.x0 @ pole_weights[Fraction(0)]).sum() / (
        (spectral.theta - 1) * (spectral.delta_prime - 1)
    )
    kept.extend(nu for nu, c in c_values.items() if abs(c) > zero_tol * scale)
    kept = sorted(kept)
    tau_prime = _refined_period(tau, kept)

    intersection = [Fraction(nu, tau) for nu in kept if Fraction(nu, tau) in pole_weights]
    if Fraction(0) not in intersection:
        raise EmptyIntersection("theta is not a common dominant pole of the kernel and boundary")

    etas = [int(angle * tau_prime) for angle in intersection]
    tau_hat = tau_prime // math.gcd(tau_prime, *etas)

    weights = list()
    for angle in intersection:
        sigma = spectral.theta * root_of_unity(angle)
        mu, v = rotated_perron_vectors(spectral, angle)
        scalar = (fund.x0 @ pole_weights[angle]) @ v / ((sigma - 1) * (spectral.delta_prime - 1))
        weights.append(scalar * mu)

    expansion = PoleExpansion(
        radius=spectral.theta,
        angles=tuple(intersection),
        order=model.b_tail.order + 1,
        weights=tuple(weights),
    )

    diagnostics = {"c_omega": c_values, "kept": kept, "intersection": intersection}

    return tau_prime, tau_hat, expansion, _real_prefactors(expansion), diagnostics


def pole_expansion_eval(expansion: PoleExpansion, k: int):
    """
    xi_k = sum_j (sigma / sigma_j)^k weight_j with sigma the common radius.
    Real for conjugate-closed expansions; returns a float for scalar weights.
    """

    value = sum(
        weight * root_of_unity(-angle * k)
        for angle, weight in zip(expansion.angles, expansion.weights)
    )

    if numpy.ndim(value) == 0:
        return float(numpy.real(value))

    return numpy.real(value)


def pole_expansion(report: AsymptoticReport) -> PoleExpansion:
    """The dominant pole expansion of a supported report."""

    if report.expansion is None:
        raise UnsupportedRegime(f"regime {report.regime.value} has no pole expansion")

    return report.expansion


def predict_tail(report: AsymptoticReport, k: int) -> numpy.ndarray:
    """Predicted x_bar(k) = binom(k + order - 1, order - 1) base^-k prefactors[k mod period]."""

    if report.expansion is None:
        raise UnsupportedRegime(f"regime {report.regime.value} has no prediction")

    binomial = math.comb(k + report.order - 1, report.order - 1)

    return binomial * report.decay_base ** (-k) * report.prefactors[k % report.period]


def analyze(
    model: MG1Model,
    spectral: SpectralProfile,
    fund: FundamentalSet,
    tolerances: Dict[str, float] = None,
) -> AsymptoticReport:
    """
    Classify the regime and compute its prefactors.

    Parameters
    ----------
    model
        A validated model with rho < 1.
    spectral
        Its spectral profile.
    fund
        The solved fundamental set.
    tolerances
        Optional overrides for "zero" and "at_rb".
    """

    tolerances = tolerances or dict()
    zero_tol = tolerances.get("zero", ZERO_TOLERANCE)
    at_rb_tol = tolerances.get("at_rb", AT_RB_TOLERANCE)

    regime = classify_regime(model, spectral, at_rb_tol)
    logger.info(f"Model {model.name} is in regime {regime.value}")

    if regime == Regime.BELOW_RB:
        c_values, kept, tau_prime, expansion = _below_from_numerators(
            spectral, _numerators_below(model, spectral, fund), zero_tol
        )
        return AsymptoticReport(
            regime=regime,
            decay_base=spectral.theta,
            period=tau_prime,
            order=1,
            prefactors=_real_prefactors(expansion),
            expansion=expansion,
            diagnostics={"tau": spectral.tau, "c_omega": c_values, "kept": kept},
        )

    if regime in (Regime.ABOVE_RB, Regime.NO_THETA_ABOVE_RB):
        expansion = prefactors_above(model, fund)
        return AsymptoticReport(
            regime=regime,
            decay_base=model.r_B,
            period=expansion.period,
            order=expansion.order,
            prefactors=_real_prefactors(expansion, check_positive=False),
            expansion=expansion,
            diagnostics={"tau": spectral.tau},
        )

    if regime == Regime.AT_RB:
        tau_prime, tau_hat, expansion, prefactors, diagnostics = prefactors_at(
            model, spectral, fund, zero_tol
        )
        return AsymptoticReport(
            regime=regime,
            decay_base=spectral.theta,
            period=tau_hat,
            order=expansion.order,
            prefactors=prefactors,
            expansion=expansion,
            diagnostics={"tau": spectral.tau, "tau_prime": tau_prime, **diagnostics},
        )

    return AsymptoticReport(regime=regime, diagnostics={"tau": spectral.tau})

"""
Ground truth for the asymptotic predictions: exact tail vectors from the
stationary prefix, empirical decay rates, and comparison tables.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy
import pandas

from mg1tail.asymptotics import AsymptoticReport, predict_tail
from mg1tail.exceptions import (InsufficientLevels, RemainderTooLarge,
                                UnsupportedRegime)
from mg1tail.fundamental import FundamentalSet, pi_star
from mg1tail.linalg import right_solve
from mg1tail.model import (DriftProfile, MG1Model, eval_B_star,
                           eval_Gamma_A_star)
from mg1tail.solver_parameters import NOISE_FLOOR, REMAINDER_TOLERANCE

logger = logging.getLogger(__name__)

# Per-class ratios agreeing to this relative tolerance mark the period
RATIO_TOLERANCE = 1e-3

# Number of levels of the last residue class used in the decay regression
REGRESSION_POINTS = 4


@dataclass(frozen=True)
class DecayEstimate:
    """Empirical decay base, period, and prefactor per residue class."""

    base: float
    period: int
    prefactors: Dict[int, numpy.ndarray]


@dataclass(frozen=True)
class ComparisonTable:
    """
    Long-format table with columns k, class, phase, exact, predicted, rel_err
    and a summary with the largest usable level, the terminal relative error,
    and the empirical decay base and period.
    """

    rows: pandas.DataFrame
    summary: Dict = field(default_factory=dict)


def exact_tails(fund: FundamentalSet, remainder_tol: float = REMAINDER_TOLERANCE) -> numpy.ndarray:
    """
    Tail vectors x_bar(k) = sum_{l > k} x(l) for k = 0..K-1 from the prefix
    x(1..K).

    The remainder sum_{l > K} x(l) is bounded by extrapolating the decay of
    the last levels over strides h = 1..M and must be below remainder_tol.
    """

    x = fund.x
    K, M = x.shape

    if K == 0:
        raise InsufficientLevels("the stationary prefix is empty")

    norms = numpy.abs(x).sum(axis=1)
    last = norms[-1]

    if last > 0:
        ratio = 0.0
        for h in range(1, min(M, K - 1) + 1):
            if norms[-1 - h] > 0:
                ratio = max(ratio, (last / norms[-1 - h]) ** (1.0 / h))
        remainder = math.inf if ratio >= 1 else last * ratio / (1 - ratio)
        if not remainder < remainder_tol:
            raise RemainderTooLarge(
                f"estimated remainder {remainder:.3e} beyond level {K} is not "
                f"below {remainder_tol:.1e}"
            )

    return numpy.cumsum(x[::-1], axis=0)[::-1]


def usable_levels(tails: numpy.ndarray, noise_floor: float = NOISE_FLOOR) -> int:
    """Number of leading levels whose smallest tail entry is at least noise_floor."""

    below = numpy.nonzero(tails.min(axis=1) < noise_floor)[0]
    return int(below[0]) if len(below) > 0 else len(tails)


def _log_binomial(k, order: int) -> numpy.ndarray:
    return numpy.array([math.log(math.comb(int(j) + order - 1, order - 1)) for j in k])


def _detect_period(norms: numpy.ndarray, max_period: int, fallback: int) -> int:
    """Smallest stride whose per-class ratios have converged at the last levels."""

    top = len(norms) - 1

    for d in range(1, max_period + 1):
        if top - 2 * d - (d - 1) < 0:
            break
        converged = True
        for k in range(top - d + 1, top + 1):
            recent = norms[k] / norms[k - d]
            earlier = norms[k - d] / norms[k - 2 * d]
            if abs(recent - earlier) > RATIO_TOLERANCE * recent:
                converged = False
                break
        if converged:
            return d

    logger.warning(f"per-class ratios did not converge for strides up to {max_period}")
    return fallback


def estimate_decay(
    tails: numpy.ndarray,
    period_hint: int = 1,
    order: int = 1,
    noise_floor: float = NOISE_FLOOR,
) -> DecayEstimate:
    """
    Estimate the decay base, period, and prefactors of a tail sequence.

    Parameters
    ----------
    tails
        Tail vectors x_bar(k) for k = 0, 1, ...
    period_hint
        Stride of the log-ratio regression over the last residue class.
    order
        Pole order; log binom(k + order - 1, order - 1) is removed before the
        regression.
    noise_floor
        Levels whose smallest entry is below this value are ignored.
    """

    n_usable = usable_levels(tails, noise_floor)
    if n_usable < 4 * period_hint:
        raise InsufficientLevels(
            f"{n_usable} levels above the noise floor, need {4 * period_hint}"
        )

    tails = tails[:n_usable]
    norms = tails.sum(axis=1)
    top = n_usable - 1

    levels = numpy.array([top - j * period_hint for j in range(REGRESSION_POINTS) if top - j * period_hint >= 0])
    slope, _ = numpy.polyfit(levels, numpy.log(norms[levels]) - _log_binomial(levels, order), 1)
    base = float(math.exp(-slope))

    period = _detect_period(norms, tails.shape[1], period_hint)

    prefactors = dict()
    for l in range(period):
        k = top - ((top - l) % period)
        prefactors[l] = base**k * tails[k] / math.comb(k + order - 1, order - 1)

    return DecayEstimate(base=base, period=period, prefactors=prefactors)


def compare(
    model: MG1Model,
    fund: FundamentalSet,
    report: AsymptoticReport,
    noise_floor: float = NOISE_FLOOR,
    remainder_tol: float = REMAINDER_TOLERANCE,
) -> ComparisonTable:
    """
    Join the predicted tails of an asymptotic report with the exact tails for
    every level k >= 1 above the noise floor.
    """

    if report.expansion is None:
        raise UnsupportedRegime(f"regime {report.regime.value} has no prediction")

    logger.info(f"Comparing predicted and exact tails for model {model.name}")

    tails = exact_tails(fund, remainder_tol)
    n_usable = usable_levels(tails, noise_floor)

    records = list()
    for k in range(1, n_usable):
        predicted = predict_tail(report, k)
        for phase, (exact, value) in enumerate(zip(tails[k], predicted)):
            records.append(
                {
                    "k": k,
                    "class": k % report.period,
                    "phase": phase,
                    "exact": exact,
                    "predicted": value,
                    "rel_err": abs(value - exact) / exact,
                }
            )

    rows = pandas.DataFrame(records, columns=["k", "class", "phase", "exact", "predicted", "rel_err"])

    summary = {"max_usable_level": n_usable - 1}
    if len(rows) > 0:
        summary["terminal_relative_error"] = float(rows[rows["k"] == rows["k"].max()]["rel_err"].max())

    try:
        estimate = estimate_decay(tails, report.period, report.order, noise_floor)
        summary["decay_base"] = estimate.base
        summary["period"] = estimate.period
    except InsufficientLevels as error:
        logger.warning(f"no empirical decay estimate: {error}")

    return ComparisonTable(rows=rows, summary=summary)


def generating_function_limit(
    model: MG1Model,
    fund: FundamentalSet,
    z: complex,
    sigma: complex,
    order: int = 1,
    drift_profile: DriftProfile = None,
) -> numpy.ndarray:
    """
    (1 - z / sigma)^order x_bar*(z) with x_bar*(z) = sum_{k >= 0} z^k x_bar(k).

    Uses x_bar*(z) = (x*(1) - x*(z)) / (1 - z) and the balance identity
    x*(z) [I - Gamma_A*(z)] = x(0) B*(z) - x(1) A(0), so only x(0) and x(1)
    of the stationary prefix enter.
    """

    identity = numpy.eye(model.M)
    numerator = fund.x0 @ eval_B_star(model, z) - fund.level(1) @ model.A[0]
    x_star = right_solve(numerator, identity - eval_Gamma_A_star(model, z))
    x_bar_star = (pi_star(model, fund, drift_profile) - x_star) / (1 - z)

    return (1 - z / sigma) ** order * x_bar_star

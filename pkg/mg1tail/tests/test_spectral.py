"""Tests for theta, the Perron curve, and the period of the kernel."""
import math
from fractions import Fraction

import numpy
import pytest

from mg1tail.benchmark_models import benchmark_models
from mg1tail.exceptions import OutsideRadius, PeriodUndefined, ValidationError
from mg1tail.linalg import lu_det_complex, root_of_unity
from mg1tail.model import eval_Gamma_A_star
from mg1tail.spectral import (delta_prime_finite_difference, find_theta,
                              madp_period, offset_matrix,
                              period_spectral_check, perron_curve,
                              rotated_perron_vectors, spectral_period)

THETA_MODELS = sorted(name for name, entry in benchmark_models.items() if entry["theta"] is not None)


@pytest.mark.parametrize("name", sorted(benchmark_models))
def test_theta_and_period(benchmark_system, name):
    spectral = benchmark_system(name).spectral()
    expected = benchmark_models[name]

    if expected["theta"] is None:
        assert spectral.theta is None
        assert spectral.mu is None
        assert spectral.period_checks == ()
    else:
        assert spectral.theta == pytest.approx(expected["theta"], rel=1e-10)

    assert spectral.tau == expected["tau"]


@pytest.mark.parametrize("name", THETA_MODELS)
def test_theta_is_fixed_point_of_perron_curve(benchmark_system, name):
    system = benchmark_system(name)
    theta = system.spectral().theta

    assert perron_curve(system.model, theta) == pytest.approx(theta, rel=1e-10)


def test_perron_curve_scalar(benchmark_system):
    model = benchmark_system("scalar").model

    assert perron_curve(model, 1.0) == pytest.approx(1.0)
    assert perron_curve(model, 1.5) == pytest.approx(1.45)


def test_perron_curve_outside_radius(benchmark_system):
    model = benchmark_system("no_theta").model

    with pytest.raises(OutsideRadius):
        perron_curve(model, 1.6)
    with pytest.raises(OutsideRadius):
        perron_curve(model, 0.0)


def test_no_theta_below_radius(benchmark_system):
    model = benchmark_system("no_theta").model

    assert find_theta(model) is None
    for y in numpy.linspace(1.05, 1.49, 12):
        assert perron_curve(model, y) < y


@pytest.mark.parametrize("name", THETA_MODELS)
def test_delta_prime(benchmark_system, name):
    system = benchmark_system(name)
    spectral = system.spectral()

    assert spectral.delta_prime > 1
    assert spectral.delta_prime == pytest.approx(
        delta_prime_finite_difference(system.model, spectral.theta), rel=1e-5
    )

    expected = benchmark_models[name].get("delta_prime")
    if expected is not None:
        assert spectral.delta_prime == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("name", THETA_MODELS)
def test_theta_is_simple_root(benchmark_system, name):
    model = benchmark_system(name).model
    spectral = benchmark_system(name).spectral()
    theta = spectral.theta

    assert spectral.delta_prime - 1 > 1e-8
    assert perron_curve(model, theta * (1 - 1e-3)) < theta * (1 - 1e-3)
    assert perron_curve(model, theta * (1 + 1e-3)) > theta * (1 + 1e-3)


@pytest.mark.parametrize("name", THETA_MODELS)
def test_no_other_poles_on_decay_circle(benchmark_system, name):
    model = benchmark_system(name).model
    spectral = benchmark_system(name).spectral()
    identity = numpy.eye(model.M)

    for step in range(720):
        turn = step / 720
        distance = abs(turn * spectral.tau - round(turn * spectral.tau)) / spectral.tau
        if distance < 0.02:
            continue
        z = spectral.theta * numpy.exp(2j * numpy.pi * turn)
        assert abs(lu_det_complex(identity - eval_Gamma_A_star(model, z))) > 1e-4


@pytest.mark.parametrize("name", THETA_MODELS)
def test_perron_normalization(benchmark_system, name):
    spectral = benchmark_system(name).spectral()

    assert spectral.mu.sum() == pytest.approx(1.0)
    assert spectral.mu @ spectral.v == pytest.approx(1.0)
    assert spectral.mu.min() > 0
    assert spectral.v.min() > 0


def test_log_convexity_of_perron_curve(benchmark_system):
    model = benchmark_system("two_phase").model
    s = numpy.linspace(-1.0, math.log(6.0), 41)
    values = numpy.log([perron_curve(model, math.exp(x)) for x in s])

    second_differences = values[2:] - 2 * values[1:-1] + values[:-2]

    assert second_differences.min() > -1e-10


@pytest.mark.parametrize(
    "support, n_phases, expected",
    [
        ([(0, 0, 2), (0, 0, 3)], 1, 1),
        ([(0, 0, 2), (0, 0, 4)], 1, 2),
        ([(0, 0, -3), (0, 0, 6)], 1, 3),
        ([(0, 1, -1), (1, 0, -1), (0, 1, 1), (1, 0, 1)], 2, 2),
    ],
)
def test_madp_period(support, n_phases, expected):
    tau, offsets = madp_period(support, n_phases)

    assert tau == expected
    assert len(offsets) == n_phases
    for i, j, w in support:
        assert (offsets[j] - offsets[i] - w) % tau == 0


def test_two_phase_offsets(benchmark_system):
    spectral = benchmark_system("two_phase").spectral()

    assert list(spectral.offsets) == benchmark_models["two_phase"]["offsets"]


def test_madp_period_undefined():
    with pytest.raises(PeriodUndefined):
        madp_period([(0, 0, 0)])


def test_madp_period_reducible():
    with pytest.raises(ValidationError, match="A not irreducible"):
        madp_period([(0, 0, 1), (1, 1, -1)], 2)


def test_period_spectral_check_two_phase(benchmark_system):
    system = benchmark_system("two_phase")
    checks = period_spectral_check(system.model, system.spectral().theta, tau=2)

    assert [n for n, _ in checks] == [1, 2]
    assert all(determinant < 1e-8 for _, determinant in checks)
    assert spectral_period(checks) == 2


def test_period_spectral_check_scalar(benchmark_system):
    spectral = benchmark_system("scalar").spectral()

    assert len(spectral.period_checks) == 1
    assert spectral_period(spectral.period_checks) == 1


@pytest.mark.parametrize("checks", [[(1, 0.3), (2, 1e-3)], []])
def test_spectral_period_without_vanishing_determinant(checks):
    with pytest.raises(PeriodUndefined, match="below 1.0e-08"):
        spectral_period(checks)


def test_offset_matrix():
    delta = offset_matrix(numpy.array([0, 1, 2]), Fraction(1, 3))

    numpy.testing.assert_allclose(
        numpy.diag(delta), [1.0, root_of_unity(Fraction(-1, 3)), root_of_unity(Fraction(-2, 3))]
    )


@pytest.mark.parametrize("name", THETA_MODELS)
def test_rotated_perron_vectors(benchmark_system, name):
    system = benchmark_system(name)
    spectral = system.spectral()

    for nu in range(spectral.tau):
        angle = Fraction(nu, spectral.tau)
        gamma = eval_Gamma_A_star(system.model, spectral.theta * root_of_unity(angle))
        mu, v = rotated_perron_vectors(spectral, angle)

        numpy.testing.assert_allclose(mu @ gamma, mu, atol=1e-8)
        numpy.testing.assert_allclose(gamma @ v, v, atol=1e-8)


def test_two_phase_rotated_vectors(benchmark_system):
    mu, v = rotated_perron_vectors(benchmark_system("two_phase").spectral(), Fraction(1, 2))

    numpy.testing.assert_allclose(mu, [0.5, -0.5], atol=1e-10)
    numpy.testing.assert_allclose(v, [1.0, -1.0], atol=1e-10)

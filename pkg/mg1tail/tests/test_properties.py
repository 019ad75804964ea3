"""Invariants checked on seeded random skip-free models."""
from fractions import Fraction

import numpy
import pytest

from mg1tail.asymptotics import (Regime, prefactors_skip_free,
                                 residue_inverse_at)
from mg1tail.exceptions import ValidationError
from mg1tail.fundamental import R_star, balance_residual
from mg1tail.linalg import root_of_unity
from mg1tail.mg1_system import MG1TailSystem
from mg1tail.model import drift, eval_Gamma_A_star, model_from_dict
from mg1tail.oracle import generating_function_limit
from mg1tail.spectral import perron_curve, spectral_period
from mg1tail.tests.cofactors import adjugate

N_MODELS = 100
MAX_PHASES = 5
MAX_SUPPORT = 6


def structured_period(seed: int) -> int:
    """Every third seed draws a model whose kernel period is even."""

    return 2 if seed % 3 == 0 else 1


def random_skip_free_model(seed: int, period: int = 1):
    """
    Draw a stable skip-free model with B(k) = A(k), C(0) = A(0), at most
    MAX_PHASES phases and level jumps up to MAX_SUPPORT - 1.

    With period > 1 every phase j gets an offset p(j) and [A(k)]_ij is kept
    only when k - 1 = p(j) - p(i) mod period.
    """

    rng = numpy.random.default_rng(seed)

    for _ in range(1000):
        M = int(rng.integers(period, MAX_PHASES + 1))
        K = int(rng.integers(2, MAX_SUPPORT + 1))
        raw = rng.random((K, M, M)) * (rng.random((K, M, M)) < 0.6)
        raw[0] *= 3.0

        if period > 1:
            offsets = rng.integers(0, period, M)
            offsets[:period] = numpy.arange(period)
            displacement = numpy.arange(K)[:, None, None] - 1
            raw = raw * ((displacement - (offsets[None, None, :] - offsets[None, :, None])) % period == 0)

        totals = raw.sum(axis=(0, 2))
        if totals.min() == 0:
            continue
        A = raw / totals[None, :, None]

        document = {
            "M": M,
            "M0": M,
            "A": A.tolist(),
            "B0": A[0].tolist(),
            "B": A[1:].tolist(),
            "C0": A[0].tolist(),
            "a_tail": None,
            "b_tail": None,
        }
        try:
            model = model_from_dict(document, name=f"random_{seed}")
        except ValidationError:
            continue
        if drift(model).rho < 0.9:
            return model

    raise RuntimeError(f"no stable irreducible model drawn for seed {seed}")


@pytest.fixture(scope="module")
def random_system():
    cache = dict()

    def get(seed):
        if seed not in cache:
            model = random_skip_free_model(seed, structured_period(seed))
            cache[seed] = MG1TailSystem(model=model, levels=60)
        return cache[seed]

    return get


@pytest.mark.parametrize("seed", range(N_MODELS))
def test_fundamental_invariants(random_system, seed):
    system = random_system(seed)
    fund = system.solve()

    assert perron_curve(system.model, 1.0) == pytest.approx(1.0, abs=1e-10)
    numpy.testing.assert_allclose(fund.G.sum(axis=1), 1.0, atol=1e-10)
    assert fund.G.min() >= -1e-14
    fixed_point = sum(A_k @ numpy.linalg.matrix_power(fund.G, k) for k, A_k in enumerate(system.model.A))
    assert numpy.abs(fixed_point - fund.G).max() < 1e-10
    assert balance_residual(system.model, fund) < 1e-9
    numpy.testing.assert_allclose(fund.x0, (1 - system.drift.rho) * fund.g_vec, atol=1e-9)


@pytest.mark.parametrize("seed", range(N_MODELS))
def test_log_convexity_of_perron_curve(random_system, seed):
    model = random_system(seed).model
    y = numpy.geomspace(0.25, 4.0, 25)

    values = numpy.log([perron_curve(model, point) for point in y])
    second_differences = values[2:] - 2 * values[1:-1] + values[:-2]

    assert second_differences.min() > -1e-9


@pytest.mark.parametrize("seed", range(N_MODELS))
def test_spectral_invariants(random_system, seed):
    system = random_system(seed)
    spectral = system.spectral()

    assert spectral.tau % structured_period(seed) == 0

    if spectral.theta is None:
        assert system.analyze().regime == Regime.UNSUPPORTED
        return

    assert spectral.theta > 1
    assert perron_curve(system.model, spectral.theta) == pytest.approx(spectral.theta, rel=1e-9)
    assert spectral.delta_prime > 1

    for n, determinant in spectral.period_checks:
        if spectral.tau % n == 0:
            assert determinant < 1e-8
        else:
            assert determinant > 1e-12
    if spectral.tau <= system.model.M:
        assert spectral_period(spectral.period_checks) == spectral.tau

    R = R_star(system.model, system.solve(), spectral.theta).real
    assert numpy.abs(numpy.linalg.eigvals(R)).max() == pytest.approx(1.0, abs=1e-7)
    numpy.testing.assert_allclose(spectral.mu @ R, spectral.mu, atol=1e-8)


@pytest.mark.parametrize("seed", [seed for seed in range(N_MODELS) if structured_period(seed) > 1])
def test_adjugate_rank_one_on_periodic_models(random_system, seed):
    system = random_system(seed)
    model, spectral = system.model, system.spectral()

    if spectral.theta is None:
        pytest.skip("delta(A*(y)) = y has no root beyond 1")

    identity = numpy.eye(model.M)
    for nu in range(spectral.tau):
        z = spectral.theta * root_of_unity(Fraction(nu, spectral.tau))
        adj = adjugate(identity - eval_Gamma_A_star(model, z))
        expected = numpy.trace(adj) * (spectral.delta_prime - 1) * residue_inverse_at(model, spectral, nu)

        numpy.testing.assert_allclose(adj, expected, atol=1e-7 * numpy.abs(adj).max())


@pytest.mark.parametrize("seed", range(N_MODELS))
def test_prefactor_invariants(random_system, seed):
    system = random_system(seed)
    spectral = system.spectral()

    if spectral.theta is None:
        pytest.skip("delta(A*(y)) = y has no root beyond 1")

    model, fund = system.model, system.solve()
    report = system.analyze()

    assert report.regime == Regime.BELOW_RB
    assert spectral.tau % report.period == 0
    assert report.diagnostics["c_omega"][0].real > 0
    for prefactor in report.prefactors.values():
        assert prefactor.min() > 0

    tau_prime, prefactors = prefactors_skip_free(model, spectral, fund, system.drift)
    assert tau_prime == report.period
    for l, prefactor in prefactors.items():
        numpy.testing.assert_allclose(prefactor, report.prefactors[l], rtol=1e-6)

    # The residue at theta of the tail generating function is c(1) mu
    weight = report.expansion.weights[report.expansion.angles.index(Fraction(0))]
    limit = generating_function_limit(model, fund, spectral.theta * (1 - 1e-6), spectral.theta)
    numpy.testing.assert_allclose(limit.real, weight.real, rtol=1e-3, atol=1e-6)

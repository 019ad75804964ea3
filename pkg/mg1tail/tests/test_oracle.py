"""Tests for exact tails, decay estimates, and comparison tables."""
import numpy
import pytest

from mg1tail.benchmark_models import benchmark_models
from mg1tail.exceptions import (InsufficientLevels, RemainderTooLarge,
                                UnsupportedRegime)
from mg1tail.mg1_system import MG1TailSystem
from mg1tail.oracle import (compare, estimate_decay, exact_tails,
                            generating_function_limit, usable_levels)


def test_exact_tails_scalar(benchmark_system):
    tails = benchmark_system("scalar").tails()

    assert tails.shape == (200, 1)
    assert tails[0, 0] == pytest.approx(0.8, rel=1e-10)
    assert tails[1, 0] == pytest.approx(0.5, rel=1e-10)
    for k in range(1, 40):
        assert tails[k, 0] == pytest.approx(0.5**k, rel=1e-9)


def test_exact_tails_at_rb(benchmark_system):
    tails = benchmark_system("at_rb").tails()

    # x(k) = 5 k / (12 2^k)
    for k in range(0, 40):
        assert tails[k, 0] == pytest.approx(5 / 12 * (k + 2) / 2**k, rel=1e-9)


def test_exact_tails_above_rb(benchmark_system):
    tails = benchmark_system("above_rb").tails()

    for k in range(0, 40):
        assert tails[k, 0] == pytest.approx(1.875 * (2 / 3) ** k - 15 / 16 * 0.5**k, rel=1e-9)


def test_remainder_too_large():
    system = MG1TailSystem(model_path=benchmark_models["scalar"]["model_path"], levels=5)

    with pytest.raises(RemainderTooLarge):
        system.tails()


def test_usable_levels():
    tails = numpy.array([[1.0, 0.5], [1e-3, 1e-4], [1e-13, 1.0], [1.0, 1.0]])

    assert usable_levels(tails, noise_floor=1e-12) == 2
    assert usable_levels(tails, noise_floor=1e-14) == 4


def test_estimate_decay_insufficient_levels():
    with pytest.raises(InsufficientLevels):
        estimate_decay(numpy.array([[1.0], [0.5], [0.25]]))


def test_estimate_decay_periodic_sequence():
    k = numpy.arange(40)
    tails = numpy.stack([3.0 ** -k * numpy.where(k % 2 == 0, 2.0, 1.0), 3.0 ** -k], axis=1)

    estimate = estimate_decay(tails, period_hint=2)

    assert estimate.base == pytest.approx(3.0, rel=1e-9)
    assert estimate.period == 2
    numpy.testing.assert_allclose(estimate.prefactors[0], [2.0, 1.0], rtol=1e-9)
    numpy.testing.assert_allclose(estimate.prefactors[1], [1.0, 1.0], rtol=1e-9)


@pytest.mark.parametrize(
    "name, base", [("scalar", 2.0), ("two_phase", 4.0), ("above_rb", 1.5), ("at_rb", 2.0)]
)
def test_estimate_decay(benchmark_system, name, base):
    system = benchmark_system(name)
    report = system.analyze()

    estimate = estimate_decay(system.tails(), report.period, report.order)

    assert estimate.base == pytest.approx(base, rel=1e-3)
    assert estimate.period == 1


@pytest.mark.parametrize(
    "name, tolerance", [("scalar", 1e-8), ("two_phase", 1e-7), ("above_rb", 1e-6)]
)
def test_compare_terminal_error(benchmark_system, name, tolerance):
    table = benchmark_system(name).compare()

    assert table.summary["terminal_relative_error"] < tolerance
    assert list(table.rows.columns) == ["k", "class", "phase", "exact", "predicted", "rel_err"]
    assert table.rows["k"].min() == 1


def test_compare_at_rb(benchmark_system):
    table = benchmark_system("at_rb").compare()

    # x_bar(k) = 5 (k + 2) / (12 2^k) against the prediction 5 (k + 1) / (12 2^k)
    assert table.summary["max_usable_level"] == 44
    assert table.summary["terminal_relative_error"] == pytest.approx(1 / 46, rel=1e-6)
    numpy.testing.assert_allclose(table.rows["rel_err"], 1 / (table.rows["k"] + 2), rtol=1e-6)


def test_compare_two_phase_rows(benchmark_system):
    table = benchmark_system("two_phase").compare()

    assert set(table.rows["phase"]) == {0, 1}
    assert set(table.rows["class"]) == {0}
    assert table.summary["decay_base"] == pytest.approx(4.0, rel=1e-6)
    assert table.summary["period"] == 1


def test_compare_unsupported(benchmark_system):
    system = benchmark_system("no_theta")

    with pytest.raises(UnsupportedRegime):
        compare(system.model, system.solve(), system.analyze())


def test_generating_function_limit_scalar(benchmark_system):
    system = benchmark_system("scalar")

    limit = generating_function_limit(system.model, system.solve(), 2.0 * (1 - 1e-6), 2.0)

    assert limit[0].real == pytest.approx(1.0, abs=1e-5)


def test_generating_function_limit_at_rb(benchmark_system):
    system = benchmark_system("at_rb")

    limit = generating_function_limit(system.model, system.solve(), 2.0 * (1 - 1e-4), 2.0, order=2)

    assert limit[0].real == pytest.approx(5 / 12, abs=1e-3)


def test_generating_function_matches_tail_series(benchmark_system):
    system = benchmark_system("above_rb")
    tails = exact_tails(system.solve())
    z = 0.7 + 0.3j

    series = sum(z**k * tails[k] for k in range(len(tails)))

    numpy.testing.assert_allclose(
        generating_function_limit(system.model, system.solve(), z, 1.0, order=0),
        series,
        atol=1e-10,
    )

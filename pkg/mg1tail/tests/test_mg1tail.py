"""
Unit and regression test for the mg1tail package.
"""

# Import package, test suite, and other packages as needed
import sys

import pytest

import mg1tail
from mg1tail.benchmark_models import benchmark_models
from mg1tail.model import load_model


def test_mg1tail_imported():
    """Sample test, will always pass so long as import statement worked."""
    assert "mg1tail" in sys.modules


def test_version():
    assert mg1tail.__version__ == "0.1.0"


@pytest.mark.parametrize("name", sorted(benchmark_models))
def test_benchmark_model_files_load(name):
    model = load_model(benchmark_models[name]["model_path"])

    assert model.name == name
    assert benchmark_models[name]["model_path"].exists()


@pytest.mark.parametrize("name", sorted(benchmark_models))
def test_benchmark_regimes(benchmark_system, name):
    system = benchmark_system(name)

    assert system.analyze().regime.value == benchmark_models[name]["regime"]

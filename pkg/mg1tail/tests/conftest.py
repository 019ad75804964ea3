"""Shared fixtures: benchmark models and their solved systems."""
import copy

import pytest

from mg1tail.benchmark_models import benchmark_models
from mg1tail.mg1_system import MG1TailSystem
from mg1tail.utilities import read_json


@pytest.fixture(scope="session")
def benchmark_system():
    """Factory returning one cached MG1TailSystem per benchmark model."""

    cache = dict()

    def get(name):
        if name not in cache:
            cache[name] = MG1TailSystem(model_path=benchmark_models[name]["model_path"])
        return cache[name]

    return get


@pytest.fixture
def benchmark_document():
    """Factory returning a fresh copy of a benchmark model file as a dict."""

    def get(name):
        return copy.deepcopy(read_json(benchmark_models[name]["model_path"]))

    return get

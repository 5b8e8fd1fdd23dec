import copy

import pytest

from tests import models


def optimization_config(model=models.parabola, population=8, generations=30, seed=1234, **solver):
    return {
        "Random Seed": seed,
        "Problem": {"Type": "Optimization", "Computational Model": model},
        "Variables": [{"Name": "X", "Lower Bound": -10.0, "Upper Bound": 10.0, "Initial Value": 0.0,
                       "Initial Standard Deviation": 2.0}],
        "Solver": {"Type": "CMAES", "Population Size": population, "Max Generations": generations, **solver},
    }


def bayesian_config(population=200, generations=200, seed=42, data=None, model=models.normal_mean, **solver):
    return {
        "Random Seed": seed,
        "Problem": {
            "Type": "Bayesian Inference",
            "Computational Model": model,
            "Reference Data": data or [0.8, 1.3, 0.9, 1.1, 0.9],
        },
        "Distributions": [{"Name": "Theta Prior", "Type": "Univariate/Normal", "Mean": 0.0, "Sigma": 10.0}],
        "Variables": [{"Name": "Theta", "Prior Distribution": "Theta Prior"}],
        "Solver": {"Type": "TMCMC", "Population Size": population, "Max Generations": generations, **solver},
    }


@pytest.fixture
def opt_config():
    return copy.deepcopy(optimization_config())


@pytest.fixture
def bayes_config():
    return copy.deepcopy(bayesian_config())


@pytest.fixture
def results_root(tmp_path):
    return tmp_path / "results"

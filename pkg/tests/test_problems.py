import math

import numpy as np
import pytest
from scipy import stats

from UQ_Engine_Helper.config_validator import config_validate
from UQ_Engine_Helper.distributions import NEG_INF
from UQ_Engine_Helper.exceptions import LengthMismatchError, MalformedResultError, MissingResultKeyError
from UQ_Engine_Helper.problems import (
    BayesianInferenceProblem,
    OptimizationProblem,
    SamplingProblem,
    build_problem,
    derive_quantity,
    log_likelihood_normal,
    log_prior,
)
from UQ_Engine_Helper.variables import VariableSpace

from tests.conftest import bayesian_config, optimization_config


def _setup(tree):
    validated = config_validate(tree)
    space = VariableSpace.from_config(validated)
    return space, build_problem(validated, space)


def test_log_likelihood_normal_matches_scipy():
    y, f, s = [1.0, 2.0], [1.5, 1.0], [0.5, 2.0]
    expected = stats.norm.logpdf(1.0, 1.5, 0.5) + stats.norm.logpdf(2.0, 1.0, 2.0)
    assert log_likelihood_normal(y, f, s) == pytest.approx(expected)


def test_log_likelihood_rejects_bad_sigma():
    assert log_likelihood_normal([1.0], [1.0], [0.0]) == NEG_INF
    assert log_likelihood_normal([1.0], [float("nan")], [1.0]) == NEG_INF


def test_log_likelihood_length_mismatch():
    with pytest.raises(LengthMismatchError):
        log_likelihood_normal([1.0, 2.0], [1.0], [1.0])


def test_optimization_passes_objective_through():
    space, problem = _setup(optimization_config())
    assert isinstance(problem, OptimizationProblem)
    assert derive_quantity(problem, [1.0], {"F(x)": -4.0}) == -4.0


def test_optimization_out_of_bounds_is_rejected():
    space, problem = _setup(optimization_config())
    assert derive_quantity(problem, [11.0], {"F(x)": 1.0}) == NEG_INF


def test_non_finite_objective_is_rejected():
    _, problem = _setup(optimization_config())
    assert derive_quantity(problem, [0.0], {"F(x)": float("nan")}) == NEG_INF
    assert derive_quantity(problem, [0.0], {"F(x)": float("inf")}) == NEG_INF


def test_missing_result_key():
    _, problem = _setup(optimization_config())
    with pytest.raises(MissingResultKeyError):
        derive_quantity(problem, [0.0], {"Other": 1.0})


def test_failed_sample_is_rejected():
    _, problem = _setup(optimization_config())
    assert derive_quantity(problem, [0.0], None) == NEG_INF


def test_sampling_problem():
    tree = optimization_config()
    tree["Problem"]["Type"] = "Sampling"
    _, problem = _setup(tree)
    assert isinstance(problem, SamplingProblem)
    assert derive_quantity(problem, [0.5], {"logP(x)": -0.125}) == -0.125


def test_bayesian_posterior_is_likelihood_plus_prior():
    space, problem = _setup(bayesian_config(data=[1.0, 2.0]))
    assert isinstance(problem, BayesianInferenceProblem)
    result = {"Reference Evaluations": [1.5, 1.5], "Standard Deviation": [1.0, 1.0]}
    evaluation = problem.evaluate([1.5], result)
    expected_ll = stats.norm.logpdf(1.0, 1.5, 1.0) + stats.norm.logpdf(2.0, 1.5, 1.0)
    expected_lp = stats.norm.logpdf(1.5, 0.0, 10.0)
    assert evaluation.log_likelihood == pytest.approx(expected_ll)
    assert evaluation.log_prior == pytest.approx(expected_lp)
    assert evaluation.value == pytest.approx(expected_ll + expected_lp)


def test_bayesian_sigma_variable_broadcast():
    tree = bayesian_config(data=[0.0, 0.0])
    tree["Distributions"].append({"Name": "Sigma Prior", "Type": "Univariate/Uniform", "Minimum": 0.0, "Maximum": 5.0})
    tree["Variables"].append({"Name": "Sigma", "Prior Distribution": "Sigma Prior"})
    _, problem = _setup(tree)
    evaluation = problem.evaluate([0.0, 2.0], {"Reference Evaluations": [0.0, 0.0]})
    assert evaluation.log_likelihood == pytest.approx(2 * stats.norm.logpdf(0.0, 0.0, 2.0))


def test_bayesian_missing_standard_deviation():
    _, problem = _setup(bayesian_config(data=[0.0]))
    with pytest.raises(MissingResultKeyError):
        problem.evaluate([0.0], {"Reference Evaluations": [0.0]})


def test_bayesian_length_mismatch():
    _, problem = _setup(bayesian_config(data=[0.0, 1.0]))
    with pytest.raises(LengthMismatchError):
        problem.evaluate([0.0], {"Reference Evaluations": [0.0], "Standard Deviation": [1.0]})


def test_log_prior_with_bounds():
    tree = bayesian_config()
    tree["Variables"][0]["Lower Bound"] = 0.0
    space, _ = _setup(tree)
    assert log_prior([-1.0], space) == NEG_INF
    assert log_prior([1.0], space) == pytest.approx(stats.norm.logpdf(1.0, 0.0, 10.0))


def test_out_of_support_prior_rejects_without_model():
    tree = bayesian_config()
    tree["Distributions"][0] = {"Name": "Theta Prior", "Type": "Univariate/Uniform", "Minimum": 0.0, "Maximum": 1.0}
    _, problem = _setup(tree)
    evaluation = problem.evaluate([2.0], {})
    assert evaluation.value == NEG_INF
    assert math.isinf(evaluation.log_prior)


def test_scalar_standard_deviation_is_malformed():
    _, problem = _setup(bayesian_config(data=[0.0, 1.0]))
    with pytest.raises(MalformedResultError):
        problem.evaluate([0.0], {"Reference Evaluations": [0.0, 1.0], "Standard Deviation": 1.0})


def test_string_reference_evaluations_are_malformed():
    _, problem = _setup(bayesian_config(data=[0.0, 1.0]))
    with pytest.raises(MalformedResultError):
        problem.evaluate([0.0], {"Reference Evaluations": "0 1", "Standard Deviation": [1.0, 1.0]})


def test_non_numeric_entry_rejects_the_sample():
    _, problem = _setup(bayesian_config(data=[0.0, 1.0]))
    evaluation = problem.evaluate([0.0], {"Reference Evaluations": [0.0, "one"], "Standard Deviation": [1.0, 1.0]})
    assert evaluation.log_likelihood == NEG_INF
    assert evaluation.value == NEG_INF


@pytest.mark.parametrize("seed", range(5))
def test_log_likelihood_ignores_datum_order(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 20))
    y, f, s = rng.normal(size=n), rng.normal(size=n), rng.uniform(0.1, 3.0, size=n)
    order = rng.permutation(n)
    expected = log_likelihood_normal(list(y), list(f), list(s))
    permuted = log_likelihood_normal(list(y[order]), list(f[order]), list(s[order]))
    assert permuted == pytest.approx(expected, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("residual", [0.0, 1.0, -5.0])
def test_wide_datum_adds_only_its_normalization(residual):
    sigma = 1e6
    base = log_likelihood_normal([1.0, 2.0], [1.5, 1.0], [0.5, 2.0])
    widened = log_likelihood_normal([1.0, 2.0, residual], [1.5, 1.0, 0.0], [0.5, 2.0, sigma])
    assert widened - base == pytest.approx(-math.log(sigma * math.sqrt(2 * math.pi)), abs=1e-9)


@pytest.mark.parametrize("y, f, s, expected", [
    ([0.0], [0.0], [1.0], -0.5 * math.log(2 * math.pi)),
    ([0.0, 0.0], [1.0, -1.0], [1.0, 1.0], -math.log(2 * math.pi) - 1.0),
    ([2.0], [0.0], [2.0], -math.log(2.0) - 0.5 * math.log(2 * math.pi) - 0.5),
    ([3.0, -1.0, 0.5], [3.0, -1.0, 0.5], [0.5, 0.5, 0.5], 3 * (math.log(2.0) - 0.5 * math.log(2 * math.pi))),
])
def test_log_likelihood_closed_form(y, f, s, expected):
    assert log_likelihood_normal(y, f, s) == pytest.approx(expected, abs=1e-12)

"""
Problem types: turn a model's raw results into the solver-facing value.

Optimization and Sampling pass the model's objective / log-density through;
Bayesian Inference combines a Normal log-likelihood of the reference data
with the log-prior of the parameters.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from .config import Config
from .distributions import NEG_INF, is_rejected
from .exceptions import LengthMismatchError, MalformedResultError, MissingResultKeyError
from .variables import VariableSpace

logger = logging.getLogger(__name__)

_CONFIG = Config()


@dataclass(frozen=True)
class Evaluation:
    """Derived quantity of one sample and, for posteriors, its two terms."""
    value: float
    log_likelihood: float = 0.0
    log_prior: float = 0.0

    @classmethod
    def rejected(cls) -> "Evaluation":
        return cls(NEG_INF, NEG_INF, NEG_INF)


def log_likelihood_normal(y: Sequence[float], evals: Sequence[float], sds: Sequence[float]) -> float:
    """
    Normal log-likelihood of reference data.

    Args:
        y: Reference data
        evals: Model evaluations, one per datum
        sds: Standard deviations, one per datum

    Returns:
        Sum over data of log N(y_i; f_i, sigma_i); the -inf sentinel for a
        nonpositive or non-finite standard deviation or evaluation
    """
    y = np.asarray(y, dtype=float)
    evals = np.asarray(evals, dtype=float)
    sds = np.asarray(sds, dtype=float)
    if not (len(y) == len(evals) == len(sds)):
        raise LengthMismatchError(
            f"Reference data ({len(y)}), evaluations ({len(evals)}) and "
            f"standard deviations ({len(sds)}) differ in length"
        )
    if not (np.all(np.isfinite(evals)) and np.all(np.isfinite(sds)) and np.all(sds > 0)):
        return NEG_INF
    return float(np.sum(stats.norm.logpdf(y, loc=evals, scale=sds)))


def log_prior(params: Sequence[float], space: VariableSpace) -> float:
    """Sum of per-variable prior log-densities; bounds reject on top of the prior."""
    if not space.within_bounds(params):
        return NEG_INF
    total = 0.0
    for prior, x in zip(space.priors(), params):
        total += prior.log_pdf(float(x))
        if total == NEG_INF:
            return NEG_INF
    return total


def _scalar(result: Mapping[str, Any], key: str) -> float:
    if key not in result:
        raise MissingResultKeyError(f"Model did not write result key '{key}'")
    try:
        value = float(result[key])
    except (TypeError, ValueError):
        return NEG_INF
    return NEG_INF if is_rejected(value) or math.isinf(value) else value


def _vector(result: Mapping[str, Any], key: str) -> List[float]:
    """Result entry ``key`` as a flat list of floats; non-numeric entries become NaN."""
    value = result[key]
    if isinstance(value, (str, bytes, Mapping)) or not hasattr(value, "__iter__"):
        raise MalformedResultError(f"Result key '{key}' must be a list of reals, got {type(value).__name__}")
    entries = []
    for entry in value:
        try:
            entries.append(float(entry))
        except (TypeError, ValueError):
            entries.append(math.nan)
    return entries


class Problem:
    """Base class for problem kinds."""

    TYPE = ""

    def __init__(self, space: VariableSpace):
        self.space = space

    def evaluate(self, params: Sequence[float], result: Mapping[str, Any]) -> Evaluation:
        raise NotImplementedError


class OptimizationProblem(Problem):
    TYPE = "Optimization"

    def evaluate(self, params, result):
        if not self.space.within_bounds(params):
            return Evaluation.rejected()
        value = _scalar(result, _CONFIG.OBJECTIVE_KEY)
        return Evaluation(value, value, 0.0)


class SamplingProblem(Problem):
    TYPE = "Sampling"

    def evaluate(self, params, result):
        if not self.space.within_bounds(params):
            return Evaluation.rejected()
        value = _scalar(result, _CONFIG.LOG_DENSITY_KEY)
        return Evaluation(value, value, 0.0)


class BayesianInferenceProblem(Problem):
    TYPE = "Bayesian Inference"

    def __init__(
        self,
        space: VariableSpace,
        reference_data: Sequence[float],
        likelihood_model: str = "Normal",
        sigma_variable: str = _CONFIG.DEFAULT_SIGMA_VARIABLE,
    ):
        super().__init__(space)
        if len(reference_data) == 0:
            raise ValueError("Bayesian Inference requires non-empty reference data")
        self.reference_data = [float(v) for v in reference_data]
        self.likelihood_model = likelihood_model
        self.sigma_variable = sigma_variable

    def standard_deviations(self, params: Sequence[float], result: Mapping[str, Any]) -> List[float]:
        """Model-reported vector, else the sigma variable broadcast to every datum."""
        if _CONFIG.STANDARD_DEVIATION_KEY in result:
            return _vector(result, _CONFIG.STANDARD_DEVIATION_KEY)
        if self.sigma_variable in self.space.names:
            sigma = float(params[self.space.index_of(self.sigma_variable)])
            return [sigma] * len(self.reference_data)
        raise MissingResultKeyError(
            f"Model did not write '{_CONFIG.STANDARD_DEVIATION_KEY}' and no variable "
            f"'{self.sigma_variable}' exists to broadcast"
        )

    def log_likelihood(self, params: Sequence[float], result: Mapping[str, Any]) -> float:
        if _CONFIG.REFERENCE_EVALUATIONS_KEY not in result:
            raise MissingResultKeyError(f"Model did not write result key '{_CONFIG.REFERENCE_EVALUATIONS_KEY}'")
        evals = _vector(result, _CONFIG.REFERENCE_EVALUATIONS_KEY)
        sds = self.standard_deviations(params, result)
        if len(evals) != len(self.reference_data):
            raise LengthMismatchError(
                f"'{_CONFIG.REFERENCE_EVALUATIONS_KEY}' has {len(evals)} entries, "
                f"reference data has {len(self.reference_data)}"
            )
        return log_likelihood_normal(self.reference_data, evals, sds)

    def evaluate(self, params, result):
        prior = log_prior(params, self.space)
        if prior == NEG_INF:
            return Evaluation.rejected()
        likelihood = self.log_likelihood(params, result)
        return Evaluation(likelihood + prior, likelihood, prior)


def build_problem(experiment: Dict[str, Any], space: VariableSpace) -> Problem:
    """Create the problem of a validated experiment tree."""
    problem = experiment["Problem"]
    kind = problem["Type"]
    if kind == OptimizationProblem.TYPE:
        return OptimizationProblem(space)
    if kind == SamplingProblem.TYPE:
        return SamplingProblem(space)
    if kind == BayesianInferenceProblem.TYPE:
        return BayesianInferenceProblem(
            space,
            problem["Reference Data"],
            problem["Likelihood Model"],
            problem["Standard Deviation Variable"],
        )
    raise ValueError(f"Unsupported problem type: {kind}")


def derive_quantity(problem: Problem, params: Sequence[float], result: Optional[Mapping[str, Any]]) -> float:
    """Derived quantity of one sample; the -inf sentinel for a failed sample."""
    if result is None:
        return NEG_INF
    return problem.evaluate(params, result).value

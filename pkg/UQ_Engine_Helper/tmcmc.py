"""
Transitional MCMC sampler for Bayesian posteriors.

Generation 0 evaluates draws from the priors. Each later generation
evaluates one Metropolis-Hastings proposal per chain. Between annealing
stages the exponent rho is raised by bisection on the weights' coefficient
of variation, the population is resampled multinomially by weight, and the
proposal covariance is set to beta^2 times the weighted sample covariance.
With ``Chain Length`` 1 every resampled particle takes a single step; longer
chains give the classic variant. Once rho reaches 1 the chains run
``Final Chain Length`` passes so resampled duplicates spread over the posterior.
"""

import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .distributions import NEG_INF
from .exceptions import AllLikelihoodsNonFiniteError
from .problems import Evaluation, log_prior
from .rng import RngStream
from .solver_base import Solver, TerminationCriteria, vector_to_list
from .variables import VariableSpace

logger = logging.getLogger(__name__)

_CONFIG = Config()

PHASE_INITIAL = "initial"
PHASE_MOVING = "moving"
PHASE_DONE = "done"


def _weights(loglikes: np.ndarray, delta_rho: float) -> np.ndarray:
    """Unnormalized weights exp(delta_rho * l_i) after max-subtraction; 0 for non-finite l_i."""
    finite = np.isfinite(loglikes)
    shifted = np.full(len(loglikes), NEG_INF)
    shifted[finite] = delta_rho * (loglikes[finite] - loglikes[finite].max())
    return np.exp(shifted)


def _coefficient_of_variation(weights: np.ndarray) -> float:
    return float(np.std(weights, ddof=1) / np.mean(weights))


def tmcmc_anneal_exponent(
    loglikes: Sequence[float],
    rho_prev: float,
    target_cov: float = _CONFIG.DEFAULT_TARGET_COV,
    tolerance: float = _CONFIG.ANNEALING_TOLERANCE,
) -> float:
    """
    Next annealing exponent.

    Args:
        loglikes: Log-likelihood of every sample of the population
        rho_prev: Current exponent, 0 <= rho_prev < 1
        target_cov: Target coefficient of variation of the weights
        tolerance: Bisection tolerance on the exponent increment

    Returns:
        rho_next in (rho_prev, 1], 1 when the full step keeps the weights'
        coefficient of variation at or below the target
    """
    loglikes = np.asarray(loglikes, dtype=float)
    finite = int(np.count_nonzero(np.isfinite(loglikes)))
    if finite < 2:
        raise AllLikelihoodsNonFiniteError(f"{finite} sample(s) with a finite log-likelihood, at least 2 needed")

    remaining = 1.0 - rho_prev
    if _coefficient_of_variation(_weights(loglikes, remaining)) <= target_cov:
        return 1.0

    low, high = 0.0, remaining
    while high - low > tolerance:
        middle = 0.5 * (low + high)
        if _coefficient_of_variation(_weights(loglikes, middle)) > target_cov:
            high = middle
        else:
            low = middle
    delta = 0.5 * (low + high)
    logger.debug(f"Annealing exponent {rho_prev:.6f} -> {rho_prev + delta:.6f}")
    return min(1.0, rho_prev + delta)


def weighted_covariance(samples: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Sum_i w_i (x_i - mean_w)(x_i - mean_w)^T for normalized weights."""
    mean = weights @ samples
    centered = samples - mean
    covariance = (centered * weights[:, None]).T @ centered
    return (covariance + covariance.T) / 2


class TmcmcSolver(Solver):
    """Transitional Markov chain Monte Carlo with evidence estimation."""

    TYPE = "TMCMC"

    def __init__(self, settings: Dict[str, Any], space: VariableSpace, seed: int):
        super().__init__(settings, space, seed)
        self.beta2 = float(settings["Covariance Scaling Factor"])
        self.chain_length = int(settings["Chain Length"])
        self.final_chain_length = int(settings["Final Chain Length"])
        self.target_cov = float(settings["Target Coefficient Of Variation"])
        self.prior_streams = {v.name: RngStream(seed, f"prior/{v.name}") for v in space.variables}

        n, size = space.dimension, self.population_size
        self.rho = 0.0
        self.phase = PHASE_INITIAL
        self.samples = np.zeros((size, n))
        self.loglikes = np.full(size, NEG_INF)
        self.logpriors = np.full(size, NEG_INF)
        self.chain_covariance = np.zeros((n, n))
        self.log_evidence = 0.0
        self.chain_step = 0
        self.acceptance_rate = 0.0
        self.rho_history: List[float] = []
        self._proposals: Optional[np.ndarray] = None
        self._proposal_chains: List[int] = []

    def _draw_from_priors(self) -> np.ndarray:
        rows = []
        for _ in range(self.population_size):
            row = []
            for variable in self.space.variables:
                prior = self.space.prior_of(variable)
                stream = self.prior_streams[variable.name]
                value = prior.sample(stream)
                for _attempt in range(_CONFIG.MAX_BOUND_RESAMPLES):
                    if variable.within_bounds(value):
                        break
                    value = prior.sample(stream)
                row.append(value)
            rows.append(row)
        return np.array(rows, dtype=float)

    def _proposal_factor(self) -> np.ndarray:
        """Square root of the proposal covariance via its eigen-decomposition."""
        eigenvalues, eigenvectors = np.linalg.eigh(self.chain_covariance)
        return eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))

    def generate(self) -> List[np.ndarray]:
        if self.phase == PHASE_INITIAL:
            proposals = self._draw_from_priors()
            self._proposal_chains = list(range(self.population_size))
            self._proposals = proposals
            return [p.copy() for p in proposals]

        factor = self._proposal_factor()
        z = self.rng.standard_normal((self.population_size, self.space.dimension))
        proposals = self.samples + z @ factor.T
        self._proposals = proposals
        # Proposals outside the prior support are rejected without evaluation
        self._proposal_chains = [
            i for i in range(self.population_size) if log_prior(proposals[i], self.space) != NEG_INF
        ]
        return [proposals[i].copy() for i in self._proposal_chains]

    def update(self, evaluations: Sequence[Evaluation]) -> None:
        if self._proposals is None or len(evaluations) != len(self._proposal_chains):
            raise ValueError(
                f"Expected {len(self._proposal_chains)} evaluations for the generated samples, got {len(evaluations)}"
            )

        if self.phase == PHASE_INITIAL:
            self.samples = self._proposals.copy()
            self.loglikes = np.array([e.log_likelihood for e in evaluations], dtype=float)
            self.logpriors = np.array([e.log_prior for e in evaluations], dtype=float)
            self.loglikes[np.isnan(self.loglikes)] = NEG_INF
            self._advance_annealing()
        else:
            self._metropolis_step(evaluations)
            self.chain_step += 1
            if self.rho >= 1.0:
                if self.chain_step >= self.final_chain_length:
                    self.phase = PHASE_DONE
                    logger.info(
                        f"TMCMC posterior mean {np.round(self.posterior_mean(), 6).tolist()}, "
                        f"variance {np.round(self.posterior_variance(), 6).tolist()}"
                    )
            elif self.chain_step >= self.chain_length:
                self._advance_annealing()

        self.generation += 1
        self._proposals = None
        self._proposal_chains = []

    def _metropolis_step(self, evaluations: Sequence[Evaluation]) -> None:
        accepted = 0
        for chain, evaluation in zip(self._proposal_chains, evaluations):
            candidate_ll = evaluation.log_likelihood
            candidate_lp = evaluation.log_prior
            u = float(self.rng.random())
            log_u = math.log(u) if u > 0 else NEG_INF
            if candidate_ll == NEG_INF or candidate_lp == NEG_INF or math.isnan(candidate_ll):
                continue
            log_alpha = self.rho * (candidate_ll - self.loglikes[chain]) + (candidate_lp - self.logpriors[chain])
            if log_u < log_alpha:
                self.samples[chain] = self._proposals[chain]
                self.loglikes[chain] = candidate_ll
                self.logpriors[chain] = candidate_lp
                accepted += 1
        self.acceptance_rate = accepted / self.population_size
        logger.debug(f"TMCMC generation {self.generation}: acceptance rate {self.acceptance_rate:.3f}")

    def _advance_annealing(self) -> None:
        """Raise rho, accumulate the evidence, resample and refresh the proposal covariance."""
        rho_next = tmcmc_anneal_exponent(self.loglikes, self.rho, self.target_cov)
        delta = rho_next - self.rho
        weights = _weights(self.loglikes, delta)
        finite = np.isfinite(self.loglikes)
        self.log_evidence += delta * float(self.loglikes[finite].max()) + math.log(float(np.mean(weights)))

        normalized = weights / weights.sum()
        self.chain_covariance = self.beta2 * weighted_covariance(self.samples, normalized)

        counts = self.rng.multinomial(self.population_size, normalized)
        leaders = np.repeat(np.arange(self.population_size), counts)
        self.samples = self.samples[leaders]
        self.loglikes = self.loglikes[leaders]
        self.logpriors = self.logpriors[leaders]

        self.rho = rho_next
        self.rho_history.append(rho_next)
        self.chain_step = 0
        self.phase = PHASE_MOVING
        logger.info(f"TMCMC annealing exponent {self.rho:.6f}, log-evidence {self.log_evidence:.6f}")

    def check_termination(self, criteria: Optional[TerminationCriteria] = None) -> Optional[str]:
        return tmcmc_check_termination(self, criteria or self.criteria)

    def posterior_mean(self) -> np.ndarray:
        return self.samples.mean(axis=0)

    def posterior_variance(self) -> np.ndarray:
        return self.samples.var(axis=0, ddof=1)

    def best(self) -> Tuple[Optional[float], Optional[List[float]]]:
        if self.phase == PHASE_INITIAL:
            return None, None
        posterior = self.loglikes + self.logpriors
        index = int(np.argmax(posterior))
        return float(posterior[index]), vector_to_list(self.samples[index])

    def summary_fields(self) -> Dict[str, Any]:
        return {
            "Annealing Exponent": self.rho,
            "Log Evidence": self.log_evidence,
            "Acceptance Rate": self.acceptance_rate,
        }

    def state_dict(self) -> Dict[str, Any]:
        return {
            "type": self.TYPE,
            "generation": self.generation,
            "phase": self.phase,
            "rho": self.rho,
            "rho_history": list(self.rho_history),
            "samples": vector_to_list(self.samples),
            "loglikes": vector_to_list(self.loglikes),
            "logpriors": vector_to_list(self.logpriors),
            "chain_covariance": vector_to_list(self.chain_covariance),
            "log_evidence": self.log_evidence,
            "chain_step": self.chain_step,
            "acceptance_rate": self.acceptance_rate,
            "forced_termination": self.forced_termination,
            "rng": self.rng.to_dict(),
            "prior_rng": {name: stream.to_dict() for name, stream in sorted(self.prior_streams.items())},
        }

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        n = self.space.dimension
        self.generation = int(state["generation"])
        self.phase = state["phase"]
        self.rho = float(state["rho"])
        self.rho_history = [float(r) for r in state["rho_history"]]
        self.samples = np.array(state["samples"], dtype=float).reshape(-1, n)
        self.loglikes = np.array(state["loglikes"], dtype=float)
        self.logpriors = np.array(state["logpriors"], dtype=float)
        self.chain_covariance = np.array(state["chain_covariance"], dtype=float).reshape(n, n)
        self.log_evidence = float(state["log_evidence"])
        self.chain_step = int(state["chain_step"])
        self.acceptance_rate = float(state["acceptance_rate"])
        self.forced_termination = bool(state["forced_termination"])
        self.rng = RngStream.from_dict(state["rng"])
        self.prior_streams = {name: RngStream.from_dict(s) for name, s in state["prior_rng"].items()}
        self._proposals = None
        self._proposal_chains = []


def tmcmc_check_termination(solver: TmcmcSolver, criteria: TerminationCriteria) -> Optional[str]:
    """Done once rho = 1 and the final chain passes completed; a generation cap forces it."""
    if solver.phase == PHASE_DONE:
        return "Annealing exponent reached 1 and the final chain passes completed"
    if criteria.max_generations is not None and solver.generation >= criteria.max_generations:
        if not solver.forced_termination:
            logger.warning(
                f"TMCMC stopped by Max Generations ({criteria.max_generations}) at annealing exponent {solver.rho:.6f}"
            )
        solver.forced_termination = True
        if solver.rho >= 1.0:
            return f"Max Generations ({criteria.max_generations}) reached during the final chain passes"
        return f"Max Generations ({criteria.max_generations}) reached before the annealing exponent reached 1"
    return None

"""
CMA-ES for maximizing the derived quantity.

Strategy parameters follow Hansen's reference defaults: mu = lambda // 2
log-weights, cumulation constants c_sigma, c_c, learning rates c_1, c_mu
and damping d_sigma. Candidates are ranked by value (highest first) only,
so the search path is invariant under strictly increasing transforms.
"""

import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import Config
from .distributions import NEG_INF
from .exceptions import DegenerateCovarianceError, NonFiniteObjectiveCountError
from .problems import Evaluation
from .rng import RngStream
from .solver_base import Solver, TerminationCriteria, vector_to_list
from .variables import VariableSpace

logger = logging.getLogger(__name__)

_CONFIG = Config()


def recombination_weights(mu: int) -> np.ndarray:
    """Normalized weights w_i proportional to ln(mu + 1/2) - ln(i), i = 1..mu."""
    raw = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    return raw / raw.sum()


class CmaesSolver(Solver):
    """Covariance matrix adaptation evolution strategy."""

    TYPE = "CMAES"

    def __init__(self, settings: Dict[str, Any], space: VariableSpace, seed: int):
        super().__init__(settings, space, seed)
        n = space.dimension
        lam = self.population_size
        self.dimension = n
        self.lam = lam
        self.mu = lam // 2
        self.weights = recombination_weights(self.mu)
        self.mueff = float(1.0 / np.sum(self.weights ** 2))

        self.cc = (4 + self.mueff / n) / (n + 4 + 2 * self.mueff / n)
        self.cs = (self.mueff + 2) / (n + self.mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + self.mueff)
        self.cmu = min(1 - self.c1, 2 * (self.mueff - 2 + 1 / self.mueff) / ((n + 2) ** 2 + self.mueff))
        self.damps = 1 + 2 * max(0.0, math.sqrt((self.mueff - 1) / (n + 1)) - 1) + self.cs
        self.chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n ** 2))

        self.mean = self._initial_mean()
        self.sigma = 1.0
        self.C = np.diag(self._initial_sds() ** 2)
        self.ps = np.zeros(n)
        self.pc = np.zeros(n)
        self.B = np.eye(n)
        self.D = np.ones(n)
        self._update_eigensystem()

        self.best_value = NEG_INF
        self.best_params: Optional[np.ndarray] = None
        self.generation_best: List[float] = []
        self.count_eval = 0
        self._candidates: Optional[np.ndarray] = None

    def _initial_mean(self) -> np.ndarray:
        values = []
        for v in self.space.variables:
            if v.initial_value is not None:
                values.append(v.initial_value)
            elif v.lower_bound is not None and v.upper_bound is not None:
                values.append(0.5 * (v.lower_bound + v.upper_bound))
            else:
                values.append(0.0)
        return np.array(values, dtype=float)

    def _initial_sds(self) -> np.ndarray:
        values = []
        for v in self.space.variables:
            if v.initial_sd is not None:
                values.append(v.initial_sd)
            elif v.lower_bound is not None and v.upper_bound is not None:
                values.append(0.3 * (v.upper_bound - v.lower_bound))
            else:
                values.append(1.0)
        return np.array(values, dtype=float)

    def _update_eigensystem(self) -> None:
        """Refresh B, D from C, re-conditioning C when it is ill-conditioned."""
        self.C = (self.C + self.C.T) / 2
        eigenvalues, eigenvectors = np.linalg.eigh(self.C)
        max_eig = float(eigenvalues.max())
        min_eig = float(eigenvalues.min())
        if min_eig <= 0 or max_eig > _CONFIG.MAX_CONDITION_NUMBER * min_eig:
            shift = max_eig / _CONFIG.MAX_CONDITION_NUMBER - min_eig
            logger.warning(f"Re-conditioning CMA-ES covariance (min eigenvalue {min_eig:.3e}, max {max_eig:.3e})")
            self.C = self.C + shift * np.eye(self.dimension)
            eigenvalues, eigenvectors = np.linalg.eigh(self.C)
            if eigenvalues.min() <= 0:
                raise DegenerateCovarianceError(
                    f"Covariance has eigenvalue {eigenvalues.min():.3e} after re-conditioning"
                )
        self.B = eigenvectors
        self.D = np.sqrt(eigenvalues)

    def _sample_one(self) -> np.ndarray:
        z = self.rng.standard_normal(self.dimension)
        return self.mean + self.sigma * (self.B @ (self.D * z))

    def generate(self) -> List[np.ndarray]:
        """
        Draw lambda candidates m + sigma * B * D * z.

        Candidates outside the variable bounds are redrawn up to
        MAX_BOUND_RESAMPLES times and then projected onto the box.
        """
        lower = self.space.lower_bounds()
        upper = self.space.upper_bounds()
        candidates = []
        for _ in range(self.lam):
            x = self._sample_one()
            attempts = 0
            while np.any(x < lower) or np.any(x > upper):
                if attempts >= _CONFIG.MAX_BOUND_RESAMPLES:
                    logger.warning(f"Projecting candidate onto bounds after {attempts} resamples")
                    x = np.clip(x, lower, upper)
                    break
                x = self._sample_one()
                attempts += 1
            candidates.append(x)
        self._candidates = np.array(candidates)
        return [c.copy() for c in candidates]

    def update(self, evaluations: Sequence[Evaluation]) -> None:
        """Rank-one and rank-mu update of mean, step size, paths and covariance."""
        if self._candidates is None or len(evaluations) != self.lam:
            raise ValueError(f"Expected {self.lam} evaluations for the generated candidates, got {len(evaluations)}")
        values = np.array([e.value for e in evaluations], dtype=float)
        values[np.isnan(values)] = NEG_INF
        if not np.any(np.isfinite(values)):
            raise NonFiniteObjectiveCountError(self.lam)

        order = np.argsort(-values, kind="stable")
        arx = self._candidates[order]
        n = self.dimension
        self.count_eval += self.lam

        top = int(order[0])
        if values[top] > self.best_value:
            self.best_value = float(values[top])
            self.best_params = self._candidates[top].copy()
        self.generation_best.append(float(values[top]))

        old_mean = self.mean
        self.mean = self.weights @ arx[: self.mu]
        y = (self.mean - old_mean) / self.sigma if self.sigma > 0 else np.zeros(n)

        inv_sqrt_c = self.B @ np.diag(1.0 / self.D) @ self.B.T
        self.ps = (1 - self.cs) * self.ps + math.sqrt(self.cs * (2 - self.cs) * self.mueff) * (inv_sqrt_c @ y)
        generations_done = self.generation + 1
        ps_norm = float(np.linalg.norm(self.ps))
        hsig = ps_norm / math.sqrt(1 - (1 - self.cs) ** (2 * generations_done)) / self.chi_n < 1.4 + 2 / (n + 1)
        self.pc = (1 - self.cc) * self.pc + hsig * math.sqrt(self.cc * (2 - self.cc) * self.mueff) * y

        if self.sigma > 0:
            artmp = (arx[: self.mu] - old_mean) / self.sigma
        else:
            artmp = np.zeros((self.mu, n))
        rank_mu = artmp.T @ np.diag(self.weights) @ artmp
        rank_one = np.outer(self.pc, self.pc) + (1 - hsig) * self.cc * (2 - self.cc) * self.C
        self.C = (1 - self.c1 - self.cmu) * self.C + self.c1 * rank_one + self.cmu * rank_mu

        self.sigma *= math.exp((self.cs / self.damps) * (ps_norm / self.chi_n - 1))
        self._update_eigensystem()
        self.generation += 1
        self._candidates = None

    def check_termination(self, criteria: Optional[TerminationCriteria] = None) -> Optional[str]:
        return cmaes_check_termination(self, criteria or self.criteria)

    def best(self) -> Tuple[Optional[float], Optional[List[float]]]:
        if self.best_params is None:
            return None, None
        return self.best_value, vector_to_list(self.best_params)

    def summary_fields(self) -> Dict[str, Any]:
        return {"Best Value": self.best_value, "Step Size": self.sigma}

    def state_dict(self) -> Dict[str, Any]:
        return {
            "type": self.TYPE,
            "generation": self.generation,
            "mean": vector_to_list(self.mean),
            "sigma": self.sigma,
            "covariance": vector_to_list(self.C),
            "ps": vector_to_list(self.ps),
            "pc": vector_to_list(self.pc),
            "eigenbasis": vector_to_list(self.B),
            "eigenvalues_sqrt": vector_to_list(self.D),
            "best_value": self.best_value,
            "best_params": None if self.best_params is None else vector_to_list(self.best_params),
            "generation_best": list(self.generation_best),
            "count_eval": self.count_eval,
            "forced_termination": self.forced_termination,
            "rng": self.rng.to_dict(),
        }

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        self.generation = int(state["generation"])
        self.mean = np.array(state["mean"], dtype=float)
        self.sigma = float(state["sigma"])
        self.C = np.array(state["covariance"], dtype=float)
        self.ps = np.array(state["ps"], dtype=float)
        self.pc = np.array(state["pc"], dtype=float)
        self.best_value = float(state["best_value"])
        self.best_params = None if state["best_params"] is None else np.array(state["best_params"], dtype=float)
        self.generation_best = [float(v) for v in state["generation_best"]]
        self.count_eval = int(state["count_eval"])
        self.forced_termination = bool(state["forced_termination"])
        self.B = np.array(state["eigenbasis"], dtype=float)
        self.D = np.array(state["eigenvalues_sqrt"], dtype=float)
        self.rng = RngStream.from_dict(state["rng"])
        self._candidates = None


def cmaes_check_termination(solver: CmaesSolver, criteria: TerminationCriteria) -> Optional[str]:
    """First satisfied criterion, or ``None``; no enabled criterion never stops."""
    if criteria.max_generations is not None and solver.generation >= criteria.max_generations:
        return f"Max Generations ({criteria.max_generations}) reached"
    if criteria.target_value is not None and solver.best_value >= criteria.target_value:
        return f"Target Value ({criteria.target_value}) reached"
    if criteria.min_step_size is not None and solver.sigma < criteria.min_step_size:
        return f"Step size {solver.sigma:.3e} below Min Step Size ({criteria.min_step_size})"
    if criteria.min_value_difference is not None and len(solver.generation_best) >= criteria.value_window:
        window = solver.generation_best[-criteria.value_window:]
        if all(np.isfinite(window)) and max(window) - min(window) < criteria.min_value_difference:
            return f"Value variation below Min Value Difference Threshold ({criteria.min_value_difference})"
    return None

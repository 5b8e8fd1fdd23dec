"""
Common generation interface shared by all solvers.

A solver proposes one generation of parameter vectors, receives their
evaluations in the same order, and updates itself. Checkpoints are taken
only between ``update`` and the next ``generate``.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .problems import Evaluation
from .rng import RngStream
from .variables import VariableSpace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TerminationCriteria:
    """Enabled stopping rules; ``None`` disables a rule."""
    max_generations: Optional[int] = None
    max_model_evaluations: Optional[int] = None
    max_wall_time: Optional[float] = None
    min_value_difference: Optional[float] = None
    value_window: int = 10
    min_step_size: Optional[float] = None
    target_value: Optional[float] = None

    @classmethod
    def from_settings(cls, solver: Dict[str, Any]) -> "TerminationCriteria":
        return cls(
            max_generations=solver.get("Max Generations"),
            max_model_evaluations=solver.get("Max Model Evaluations"),
            max_wall_time=solver.get("Max Wall Time"),
            min_value_difference=solver.get("Min Value Difference Threshold"),
            value_window=solver.get("Value Difference Window") or 10,
            min_step_size=solver.get("Min Step Size"),
            target_value=solver.get("Target Value"),
        )


def vector_to_list(array: np.ndarray) -> List[Any]:
    """JSON-safe nested list of Python floats."""
    return np.asarray(array, dtype=float).tolist()


class Solver(ABC):
    """Base class for population-based solvers."""

    TYPE = ""

    def __init__(self, settings: Dict[str, Any], space: VariableSpace, seed: int):
        self.settings = settings
        self.space = space
        self.seed = seed
        self.rng = RngStream(seed, f"solver/{self.TYPE}")
        self.criteria = TerminationCriteria.from_settings(settings)
        self.generation = 0
        self.forced_termination = False

    @property
    def population_size(self) -> int:
        return int(self.settings["Population Size"])

    @abstractmethod
    def generate(self) -> List[np.ndarray]:
        """Parameter vectors to evaluate for the current generation."""

    @abstractmethod
    def update(self, evaluations: Sequence[Evaluation]) -> None:
        """Consume the evaluations of the vectors returned by ``generate``."""

    @abstractmethod
    def check_termination(self, criteria: Optional[TerminationCriteria] = None) -> Optional[str]:
        """Reason for stopping, or ``None`` to continue."""

    @abstractmethod
    def state_dict(self) -> Dict[str, Any]:
        """Complete serializable state, every RNG stream included."""

    @abstractmethod
    def load_state_dict(self, state: Dict[str, Any]) -> None:
        """Restore the state written by ``state_dict``."""

    @abstractmethod
    def best(self) -> Tuple[Optional[float], Optional[List[float]]]:
        """Best value and parameters seen so far (or the posterior mean for samplers)."""

    @abstractmethod
    def summary_fields(self) -> Dict[str, Any]:
        """Per-generation progress columns for ``summary.csv``."""

"""
Experiment variables: names, box bounds and resolved priors.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .distributions import Distribution, build_distribution
from .exceptions import UnresolvedPriorError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Variable:
    """One named entry of the parameter vector."""
    name: str
    lower_bound: Optional[float] = None
    upper_bound: Optional[float] = None
    prior_name: Optional[str] = None
    initial_value: Optional[float] = None
    initial_sd: Optional[float] = None

    def within_bounds(self, value: float) -> bool:
        if self.lower_bound is not None and value < self.lower_bound:
            return False
        if self.upper_bound is not None and value > self.upper_bound:
            return False
        return True


class VariableSpace:
    """Ordered variables of an experiment with their prior distributions."""

    def __init__(self, variables: Sequence[Variable], distributions: Sequence[Distribution] = ()):
        self.variables: List[Variable] = list(variables)
        self.distributions: Dict[str, Distribution] = {d.name: d for d in distributions}

    @classmethod
    def from_config(cls, experiment: Dict[str, Any]) -> "VariableSpace":
        """Build from a validated experiment tree."""
        variables = [
            Variable(
                name=v["Name"],
                lower_bound=v["Lower Bound"],
                upper_bound=v["Upper Bound"],
                prior_name=v["Prior Distribution"],
                initial_value=v["Initial Value"],
                initial_sd=v["Initial Standard Deviation"],
            )
            for v in experiment["Variables"]
        ]
        distributions = [build_distribution(d) for d in experiment["Distributions"]]
        return cls(variables, distributions)

    @property
    def dimension(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> List[str]:
        return [v.name for v in self.variables]

    def index_of(self, name: str) -> int:
        return self.names.index(name)

    def prior_of(self, variable: Variable) -> Distribution:
        if variable.prior_name is None or variable.prior_name not in self.distributions:
            raise UnresolvedPriorError(
                f"Variable '{variable.name}' has no resolvable prior (got {variable.prior_name!r})"
            )
        return self.distributions[variable.prior_name]

    def priors(self) -> List[Distribution]:
        """Per-variable resolved priors in variable order."""
        return [self.prior_of(v) for v in self.variables]

    def within_bounds(self, params: Sequence[float]) -> bool:
        return all(v.within_bounds(float(x)) for v, x in zip(self.variables, params))

    def lower_bounds(self) -> np.ndarray:
        return np.array([-np.inf if v.lower_bound is None else v.lower_bound for v in self.variables])

    def upper_bounds(self) -> np.ndarray:
        return np.array([np.inf if v.upper_bound is None else v.upper_bound for v in self.variables])

    def to_named(self, params: Sequence[float]) -> Dict[str, float]:
        """Map a parameter vector to ``{variable name: value}`` (model inputs)."""
        return {v.name: float(x) for v, x in zip(self.variables, params)}

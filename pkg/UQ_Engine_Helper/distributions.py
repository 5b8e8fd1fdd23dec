"""
Univariate prior distributions and the rejection sentinel.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict

from scipy import stats

from .rng import RngStream

logger = logging.getLogger(__name__)

# Log-density of anything outside a support. -inf + finite == -inf and
# max()/sort keep it last, so it flows through sums and rankings untouched.
NEG_INF = float("-inf")


def is_rejected(value: float) -> bool:
    """True for the -inf sentinel and for NaN produced by a broken model."""
    return math.isnan(value) or value == NEG_INF


@dataclass(frozen=True)
class Distribution:
    """Base class for named univariate distributions."""
    name: str

    TYPE = ""

    def log_pdf(self, x: float) -> float:
        raise NotImplementedError

    def sample(self, rng: RngStream) -> float:
        raise NotImplementedError

    def to_config(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class UnivariateNormal(Distribution):
    mean: float = 0.0
    sigma: float = 1.0

    TYPE = "Univariate/Normal"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"Distribution '{self.name}': Sigma must be positive, got {self.sigma}")

    def log_pdf(self, x: float) -> float:
        return float(stats.norm.logpdf(x, loc=self.mean, scale=self.sigma))

    def sample(self, rng: RngStream) -> float:
        return float(rng.normal(self.mean, self.sigma))

    def to_config(self) -> Dict[str, Any]:
        return {"Name": self.name, "Type": self.TYPE, "Mean": self.mean, "Sigma": self.sigma}


@dataclass(frozen=True)
class UnivariateUniform(Distribution):
    minimum: float = 0.0
    maximum: float = 1.0

    TYPE = "Univariate/Uniform"

    def __post_init__(self):
        if not self.minimum < self.maximum:
            raise ValueError(
                f"Distribution '{self.name}': Minimum must be below Maximum "
                f"({self.minimum} >= {self.maximum})"
            )

    def log_pdf(self, x: float) -> float:
        if x < self.minimum or x > self.maximum:
            return NEG_INF
        return float(stats.uniform.logpdf(x, loc=self.minimum, scale=self.maximum - self.minimum))

    def sample(self, rng: RngStream) -> float:
        return float(rng.uniform(self.minimum, self.maximum))

    def to_config(self) -> Dict[str, Any]:
        return {"Name": self.name, "Type": self.TYPE, "Minimum": self.minimum, "Maximum": self.maximum}


def dist_log_pdf(distribution: Distribution, x: float) -> float:
    """Natural log density; the -inf sentinel outside the support."""
    return distribution.log_pdf(x)


def dist_sample(distribution: Distribution, rng: RngStream) -> float:
    """Draw one value from the distribution, advancing ``rng``."""
    return distribution.sample(rng)


def build_distribution(settings: Dict[str, Any]) -> Distribution:
    """Create a distribution from validated ``Distributions[i]`` settings."""
    kind = settings["Type"]
    if kind == UnivariateNormal.TYPE:
        return UnivariateNormal(settings["Name"], float(settings["Mean"]), float(settings["Sigma"]))
    if kind == UnivariateUniform.TYPE:
        return UnivariateUniform(settings["Name"], float(settings["Minimum"]), float(settings["Maximum"]))
    raise ValueError(f"Unsupported distribution type: {kind}")

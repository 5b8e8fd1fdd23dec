"""
Module descriptors for experiment configuration trees.

A descriptor lists the keys one module consumes. Descriptors with
``variants`` are polymorphic: the value of their ``Type`` key selects an
extra set of fields (e.g. CMAES vs. TMCMC settings).
"""

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Tuple

from .config import Config

_CONFIG = Config()


@dataclass(frozen=True)
class FieldSpec:
    """One key of a configuration subtree."""
    name: str
    kind: str
    required: bool = False
    default: Any = None
    choices: Tuple[Any, ...] = ()
    descriptor: Optional["Descriptor"] = None
    check: Optional[Callable[[Any], bool]] = None
    check_text: str = ""


@dataclass(frozen=True)
class Descriptor:
    """A module's table of accepted keys."""
    name: str
    fields: Tuple[FieldSpec, ...]
    variants: Dict[str, Tuple[FieldSpec, ...]] = field(default_factory=dict)
    variant_key: str = "Type"

    def fields_for(self, variant: Optional[str]) -> Tuple[FieldSpec, ...]:
        return self.fields + tuple(self.variants.get(variant, ()))


def _positive(value) -> bool:
    return value > 0


def _non_negative(value) -> bool:
    return value >= 0


def _at_least_two(value) -> bool:
    return value >= 2


MODEL_DESCRIPTOR = Descriptor(
    name="Computational Model",
    fields=(
        FieldSpec("Type", "string", required=True, choices=_CONFIG.MODEL_TYPES),
    ),
    variants={
        "Python": (
            FieldSpec("Function", "string", required=True),
        ),
        "Concurrent": (
            FieldSpec("Command", "string", required=True),
            FieldSpec("Result Channel", "string", default="stdout", choices=_CONFIG.RESULT_CHANNELS),
            FieldSpec("Result File", "string"),
            FieldSpec("Timeout", "real", default=_CONFIG.DEFAULT_MODEL_TIMEOUT,
                      check=_positive, check_text="positive real"),
        ),
    },
)

PROBLEM_DESCRIPTOR = Descriptor(
    name="Problem",
    fields=(
        FieldSpec("Type", "string", required=True, choices=_CONFIG.PROBLEM_TYPES),
        FieldSpec("Computational Model", "model", required=True, descriptor=MODEL_DESCRIPTOR),
    ),
    variants={
        "Bayesian Inference": (
            FieldSpec("Likelihood Model", "string", default="Normal", choices=_CONFIG.LIKELIHOOD_MODELS),
            FieldSpec("Reference Data", "real_list", required=True),
            FieldSpec("Standard Deviation Variable", "string", default=_CONFIG.DEFAULT_SIGMA_VARIABLE),
        ),
    },
)

VARIABLE_DESCRIPTOR = Descriptor(
    name="Variable",
    fields=(
        FieldSpec("Name", "string", required=True),
        FieldSpec("Lower Bound", "real"),
        FieldSpec("Upper Bound", "real"),
        FieldSpec("Prior Distribution", "string"),
        FieldSpec("Initial Value", "real"),
        FieldSpec("Initial Standard Deviation", "real", check=_positive, check_text="positive real"),
    ),
)

DISTRIBUTION_DESCRIPTOR = Descriptor(
    name="Distribution",
    fields=(
        FieldSpec("Name", "string", required=True),
        FieldSpec("Type", "string", required=True, choices=_CONFIG.DISTRIBUTION_TYPES),
    ),
    variants={
        "Univariate/Normal": (
            FieldSpec("Mean", "real", required=True),
            FieldSpec("Sigma", "real", required=True, check=_positive, check_text="positive real"),
        ),
        "Univariate/Uniform": (
            FieldSpec("Minimum", "real", required=True),
            FieldSpec("Maximum", "real", required=True),
        ),
    },
)

SOLVER_DESCRIPTOR = Descriptor(
    name="Solver",
    fields=(
        FieldSpec("Type", "string", required=True, choices=_CONFIG.SOLVER_TYPES),
        FieldSpec("Population Size", "int", required=True, check=_at_least_two, check_text="integer >= 2"),
        FieldSpec("Max Generations", "int", default=_CONFIG.DEFAULT_MAX_GENERATIONS,
                  check=_non_negative, check_text="non-negative integer"),
        FieldSpec("Max Model Evaluations", "int", check=_non_negative, check_text="non-negative integer"),
        FieldSpec("Max Wall Time", "real", check=_positive, check_text="positive real"),
    ),
    variants={
        "CMAES": (
            FieldSpec("Min Value Difference Threshold", "real", check=_positive, check_text="positive real"),
            FieldSpec("Value Difference Window", "int", default=_CONFIG.DEFAULT_VALUE_WINDOW,
                      check=_positive, check_text="positive integer"),
            FieldSpec("Min Step Size", "real", check=_positive, check_text="positive real"),
            FieldSpec("Target Value", "real"),
        ),
        "TMCMC": (
            FieldSpec("Covariance Scaling Factor", "real", default=_CONFIG.DEFAULT_COVARIANCE_SCALING,
                      check=_positive, check_text="positive real"),
            FieldSpec("Chain Length", "int", default=_CONFIG.DEFAULT_CHAIN_LENGTH,
                      check=_positive, check_text="positive integer"),
            FieldSpec("Final Chain Length", "int", default=_CONFIG.DEFAULT_FINAL_CHAIN_LENGTH,
                      check=_positive, check_text="positive integer"),
            FieldSpec("Target Coefficient Of Variation", "real", default=_CONFIG.DEFAULT_TARGET_COV,
                      check=_positive, check_text="positive real"),
        ),
    },
)

FILE_OUTPUT_DESCRIPTOR = Descriptor(
    name="File Output",
    fields=(
        FieldSpec("Path", "string"),
        FieldSpec("Keep Checkpoints", "int", default=0, check=_non_negative, check_text="non-negative integer"),
    ),
)

EXPERIMENT_DESCRIPTOR = Descriptor(
    name="Experiment",
    fields=(
        FieldSpec("Name", "string"),
        FieldSpec("Random Seed", "seed"),
        FieldSpec("Problem", "tree", required=True, descriptor=PROBLEM_DESCRIPTOR),
        FieldSpec("Variables", "tree_list", required=True, descriptor=VARIABLE_DESCRIPTOR),
        FieldSpec("Distributions", "tree_list", default=[], descriptor=DISTRIBUTION_DESCRIPTOR),
        FieldSpec("Solver", "tree", required=True, descriptor=SOLVER_DESCRIPTOR),
        FieldSpec("File Output", "tree", default={}, descriptor=FILE_OUTPUT_DESCRIPTOR),
    ),
)

"""
Configuration classes for UQ Engine Helper package.
"""

from dataclasses import dataclass
from typing import Tuple
from openpyxl.styles import PatternFill, Font, Alignment, Border, Side


@dataclass(frozen=True)
class Config:
    """Configuration constants for the UQ engine."""
    PROBLEM_TYPES: Tuple[str, ...] = ("Optimization", "Sampling", "Bayesian Inference")
    SOLVER_TYPES: Tuple[str, ...] = ("CMAES", "TMCMC")
    DISTRIBUTION_TYPES: Tuple[str, ...] = ("Univariate/Normal", "Univariate/Uniform")
    LIKELIHOOD_MODELS: Tuple[str, ...] = ("Normal",)
    MODEL_TYPES: Tuple[str, ...] = ("Python", "Concurrent")
    RESULT_CHANNELS: Tuple[str, ...] = ("stdout", "file")

    # Result keys written by computational models
    OBJECTIVE_KEY: str = "F(x)"
    LOG_DENSITY_KEY: str = "logP(x)"
    REFERENCE_EVALUATIONS_KEY: str = "Reference Evaluations"
    STANDARD_DEVIATION_KEY: str = "Standard Deviation"

    DEFAULT_MAX_GENERATIONS: int = 1000
    DEFAULT_SIGMA_VARIABLE: str = "Sigma"
    DEFAULT_COVARIANCE_SCALING: float = 0.04
    DEFAULT_TARGET_COV: float = 1.0
    DEFAULT_CHAIN_LENGTH: int = 1
    DEFAULT_FINAL_CHAIN_LENGTH: int = 30
    DEFAULT_VALUE_WINDOW: int = 10
    DEFAULT_MODEL_TIMEOUT: float = 600.0

    # CMA-ES numerics
    MAX_CONDITION_NUMBER: float = 1e14
    MAX_BOUND_RESAMPLES: int = 100

    # TMCMC numerics
    ANNEALING_TOLERANCE: float = 1e-8

    # Checkpoints
    CHECKPOINT_FORMAT_VERSION: int = 1
    CHECKPOINT_PATTERN: str = "gen{:05d}.state"
    LATEST_POINTER: str = "latest"
    SUMMARY_FILE: str = "summary.csv"

    MAX_EXPERIMENT_FILE_SIZE_MB: int = 50
    SUPPORTED_EXTENSIONS: Tuple[str, ...] = ('json',)


@dataclass(frozen=True)
class ExcelStyling:
    """Excel styling configuration for benchmark workbooks."""
    header_fill: PatternFill = PatternFill(start_color="BDD7EE", end_color="BDD7EE", fill_type="solid")
    header_font: Font = Font(bold=True)
    highlight_fill: PatternFill = PatternFill(start_color="E2EFDA", end_color="E2EFDA", fill_type="solid")
    highlight_font: Font = Font(bold=True)
    center_alignment: Alignment = Alignment(horizontal="center", vertical="center")
    thin_border: Border = Border(
        left=Side(style="thin"), right=Side(style="thin"),
        top=Side(style="thin"), bottom=Side(style="thin")
    )

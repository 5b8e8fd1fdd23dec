"""
UQ Engine Helper Package
Population-based optimization and Bayesian sampling experiments evaluated
through a shared, fault-tolerant worker conduit, with per-generation
checkpoints and a synthetic scheduling benchmark.
"""

from .config import Config, ExcelStyling
from .exceptions import (
    ValidationError,
    UnknownKeyError,
    TypeMismatchError,
    MissingRequiredError,
    ProblemError,
    SolverError,
    ConduitError,
    CheckpointError,
    ReportIoError,
)
from .config_validator import ConfigValidator, config_validate
from .distributions import NEG_INF, UnivariateNormal, UnivariateUniform, dist_log_pdf, dist_sample
from .rng import RngStream
from .variables import Variable, VariableSpace
from .problems import derive_quantity, log_likelihood_normal, log_prior
from .cmaes import CmaesSolver
from .tmcmc import TmcmcSolver, tmcmc_anneal_exponent
from .concurrent_model import ModelBinding, run_concurrent_model
from .conduit import ThreadConduit, WorkerState, conduit_start, validate_transition_log
from .simulated_conduit import SimulatedConduit
from .process_conduit import ProcessConduit
from .checkpoint import CheckpointStore, checkpoint_load
from .engine import Engine, Experiment, checkpoint_resume, check_termination, engine_run, run_in_stints
from .experiment_loader import ExperimentLoader
from .bench import Scheduling, WaitModel, bench_run, weak_scaling_sweep
from .report_generator import ReportGenerator, timeline_export
from .excel_exporter import ExcelExporter
from .text_report import TextReportGenerator
from .results_browser import ResultsBrowser

__version__ = "1.0.0"

__all__ = [
    "Config",
    "ExcelStyling",
    "ValidationError",
    "UnknownKeyError",
    "TypeMismatchError",
    "MissingRequiredError",
    "ProblemError",
    "SolverError",
    "ConduitError",
    "CheckpointError",
    "ReportIoError",
    "ConfigValidator",
    "config_validate",
    "NEG_INF",
    "UnivariateNormal",
    "UnivariateUniform",
    "dist_log_pdf",
    "dist_sample",
    "RngStream",
    "Variable",
    "VariableSpace",
    "derive_quantity",
    "log_likelihood_normal",
    "log_prior",
    "CmaesSolver",
    "TmcmcSolver",
    "tmcmc_anneal_exponent",
    "ModelBinding",
    "run_concurrent_model",
    "ThreadConduit",
    "WorkerState",
    "conduit_start",
    "validate_transition_log",
    "SimulatedConduit",
    "ProcessConduit",
    "CheckpointStore",
    "checkpoint_load",
    "Engine",
    "Experiment",
    "checkpoint_resume",
    "check_termination",
    "engine_run",
    "run_in_stints",
    "ExperimentLoader",
    "Scheduling",
    "WaitModel",
    "bench_run",
    "weak_scaling_sweep",
    "ReportGenerator",
    "timeline_export",
    "ExcelExporter",
    "TextReportGenerator",
    "ResultsBrowser",
]

"""
Generation loop over one or more experiments sharing a conduit.

Per experiment: check termination, generate, map parameters to named model
inputs, submit, collect, derive the quantity of every sample, update the
solver and store the generation. Experiments advance independently; the
control loop switches between them whenever results arrive.
"""

import copy
import dataclasses
import logging
import time
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from utils.config import RESULTS_ROOT

from .checkpoint import CheckpointStore, checkpoint_load, resolve_checkpoint_path
from .cmaes import CmaesSolver
from .concurrent_model import ModelBinding, function_reference
from .conduit import Conduit, conduit_start
from .config import Config
from .config_validator import config_validate
from .exceptions import CheckpointError, ConduitError, ProblemError, SolverError
from .problems import Evaluation, build_problem
from .rng import MAX_SEED
from .sample import Sample, SampleOutcome
from .solver_base import Solver
from .tmcmc import TmcmcSolver
from .variables import VariableSpace

logger = logging.getLogger(__name__)

_CONFIG = Config()

SOLVERS = {CmaesSolver.TYPE: CmaesSolver, TmcmcSolver.TYPE: TmcmcSolver}


class ExperimentStatus(str, Enum):
    INITIALIZED = "Initialized"
    RUNNING = "Running"
    FINISHED = "Finished"


_NEXT_STATUS = {
    ExperimentStatus.INITIALIZED: ExperimentStatus.RUNNING,
    ExperimentStatus.RUNNING: ExperimentStatus.FINISHED,
}


def fresh_seed() -> int:
    return int(np.random.SeedSequence().entropy) % MAX_SEED


def build_solver(settings: Dict[str, Any], space: VariableSpace, seed: int) -> Solver:
    return SOLVERS[settings["Type"]](settings, space, seed)


def storable_config(config: Dict[str, Any]) -> Dict[str, Any]:
    """Config tree with a callable model replaced by its import reference."""
    stored = dict(config)
    problem = dict(config["Problem"])
    model = problem["Computational Model"]
    if callable(model):
        problem["Computational Model"] = {"Type": "Python", "Function": function_reference(model) or "__main__:<unnamed>"}
    stored["Problem"] = problem
    return copy.deepcopy(stored)


class Experiment:
    """
    One validated experiment: problem, solver, model binding and results directory.

    Args:
        config: Experiment tree (validated here; validation is idempotent)
        name: Experiment id and results sub-directory, defaults to ``Name``
        model: Callable overriding ``Problem/Computational Model``
        results_root: Overrides ``File Output/Path``
    """

    def __init__(
        self,
        config: Dict[str, Any],
        name: Optional[str] = None,
        model: Optional[Callable] = None,
        results_root: Optional[Union[str, Path]] = None,
    ):
        if model is not None:
            config = dict(config)
            config["Problem"] = dict(config["Problem"], **{"Computational Model": model})
        self.config = config_validate(config)
        if self.config.get("Random Seed") is None:
            self.config["Random Seed"] = fresh_seed()
            logger.info(f"No seed given; drew {self.config['Random Seed']}")
        self.seed: int = self.config["Random Seed"]
        self.name = name or self.config.get("Name") or "experiment"

        self.space = VariableSpace.from_config(self.config)
        self.problem = build_problem(self.config, self.space)
        self.solver = build_solver(self.config["Solver"], self.space, self.seed)
        self.binding = ModelBinding.from_config(self.config["Problem"]["Computational Model"])

        output = self.config["File Output"]
        root = Path(results_root or output.get("Path") or RESULTS_ROOT)
        self.directory = root / self.name
        self.store = CheckpointStore(self.directory, output.get("Keep Checkpoints", 0))

        self.status = ExperimentStatus.INITIALIZED
        self.evaluations = 0
        self.generation_limit: Optional[int] = None
        self.max_generations_override: Optional[int] = None
        self.interrupted = False
        self.termination_reason: Optional[str] = None
        self.error: Optional[str] = None
        self.trajectory: List[Optional[List[float]]] = []

        self._candidates: List[np.ndarray] = []
        self._outcomes: Dict[str, SampleOutcome] = {}
        self._started_at: Optional[float] = None
        self._generation_started_at: Optional[float] = None

    @property
    def generation(self) -> int:
        return self.solver.generation

    @property
    def summary_path(self) -> Path:
        return self.directory / _CONFIG.SUMMARY_FILE

    def set_status(self, status: ExperimentStatus) -> None:
        if status == self.status:
            return
        if _NEXT_STATUS.get(self.status) != status:
            raise ValueError(f"Illegal experiment transition {self.status.value} -> {status.value}")
        self.status = status

    def limit_generations(self, additional: int) -> None:
        """Stop after ``additional`` more generations without touching the stored config."""
        self.generation_limit = self.generation + additional

    def extend_generations(self, additional: int) -> None:
        """Replace ``Max Generations`` for this run by the current generation plus ``additional``."""
        self.max_generations_override = self.generation + additional

    def checkpoint_payload(self) -> Dict[str, Any]:
        value, parameters = self.solver.best()
        return {
            "name": self.name,
            "seed": self.seed,
            "config": storable_config(self.config),
            "generation": self.generation,
            "evaluations": self.evaluations,
            "status": self.status.value,
            "solver": self.solver.state_dict(),
            "best": {"value": value, "parameters": parameters},
        }

    @classmethod
    def from_checkpoint(
        cls, path: Union[str, Path], model: Optional[Callable] = None
    ) -> "Experiment":
        """Rebuild an experiment from a state file and continue in the same directory."""
        state_file = resolve_checkpoint_path(path)
        payload = checkpoint_load(state_file)
        experiment = cls(payload["config"], name=payload["name"], model=model)
        experiment.directory = state_file.parent
        experiment.store = CheckpointStore(state_file.parent, experiment.store.keep)
        experiment.solver.load_state_dict(payload["solver"])
        experiment.evaluations = int(payload["evaluations"])
        experiment.store.discard_after(experiment.generation - 1)
        truncate_summary(experiment.summary_path, experiment.generation - 1)
        logger.info(f"Experiment '{experiment.name}' resumed after generation {experiment.generation - 1}")
        return experiment


def check_termination(experiment: Experiment) -> Optional[str]:
    """Solver criteria plus the engine caps; the reason to stop, or ``None``."""
    criteria = experiment.solver.criteria
    if experiment.max_generations_override is not None:
        criteria = dataclasses.replace(criteria, max_generations=experiment.max_generations_override)
    reason = experiment.solver.check_termination(criteria)
    if reason:
        return reason
    if experiment.generation_limit is not None and experiment.generation >= experiment.generation_limit:
        experiment.interrupted = True
        return f"Generation limit ({experiment.generation_limit}) reached"
    if criteria.max_model_evaluations is not None and experiment.evaluations >= criteria.max_model_evaluations:
        return f"Max Model Evaluations ({criteria.max_model_evaluations}) reached"
    if criteria.max_wall_time is not None and experiment._started_at is not None:
        elapsed = time.monotonic() - experiment._started_at
        if elapsed >= criteria.max_wall_time:
            return f"Max Wall Time ({criteria.max_wall_time}s) reached"
    return None


def append_summary(path: Path, row: Dict[str, Any]) -> None:
    frame = pd.DataFrame([row])
    frame.to_csv(path, mode="a", header=not path.exists(), index=False)


def truncate_summary(path: Path, last_generation: int) -> None:
    """Drop summary rows after ``last_generation``."""
    if not path.exists():
        return
    if last_generation < 0:
        path.unlink()
        return
    summary = pd.read_csv(path)
    kept = summary[summary["Generation"] <= last_generation]
    if len(kept) != len(summary):
        kept.to_csv(path, index=False)
        logger.info(f"Summary truncated to generation {last_generation}")


class Engine:
    """
    Runs experiments to completion on one conduit.

    Args:
        conduit: Started conduit to use; otherwise one is started per run
        workers: Worker count for an engine-owned conduit
        team_size: Ranks per worker team for an engine-owned conduit
        mode: Back-end of an engine-owned conduit
        poll_timeout: Longest single wait for worker messages, in seconds
    """

    def __init__(
        self,
        conduit: Optional[Conduit] = None,
        workers: int = 1,
        team_size: int = 1,
        mode: str = "thread",
        poll_timeout: Optional[float] = 1.0,
    ):
        self.conduit = conduit
        self.workers = workers
        self.team_size = team_size
        self.mode = mode
        self.poll_timeout = poll_timeout

    def run(self, experiments: Union[Experiment, Sequence[Experiment]]) -> List[Experiment]:
        if isinstance(experiments, Experiment):
            experiments = [experiments]
        experiments = list(experiments)
        names = [e.name for e in experiments]
        if len(set(names)) != len(names):
            raise ValueError(f"Experiment names must be unique within a run: {names}")

        owned = self.conduit is None
        conduit = conduit_start(self.workers, self.team_size, self.mode) if owned else self.conduit
        by_name = {e.name: e for e in experiments}
        try:
            for experiment in experiments:
                self._start(experiment, conduit)
            while any(e.status == ExperimentStatus.RUNNING for e in experiments):
                conduit.dispatch_step()
                conduit.wait(self.poll_timeout)
                for outcome in conduit.collect():
                    experiment = by_name.get(outcome.experiment_id)
                    if experiment is None or experiment.status != ExperimentStatus.RUNNING:
                        raise ConduitError(f"Result routed to inactive experiment '{outcome.experiment_id}'")
                    experiment._outcomes[outcome.sample_id] = outcome
                    if len(experiment._outcomes) == len(experiment._candidates):
                        self._complete_generation(experiment, conduit)
        finally:
            if owned:
                conduit.stop()
        return experiments

    def _start(self, experiment: Experiment, conduit: Conduit) -> None:
        experiment.set_status(ExperimentStatus.RUNNING)
        experiment._started_at = time.monotonic()
        experiment.directory.mkdir(parents=True, exist_ok=True)
        if experiment.generation == 0:
            experiment.store.discard_after(-1)
            truncate_summary(experiment.summary_path, -1)
        conduit.register(experiment.name, experiment.binding)
        logger.info(
            f"Experiment '{experiment.name}' started at generation {experiment.generation} "
            f"({experiment.solver.TYPE}, seed {experiment.seed})"
        )
        self._begin_generation(experiment, conduit)

    def _finish(self, experiment: Experiment, conduit: Conduit, reason: Optional[str] = None,
                error: Optional[str] = None) -> None:
        experiment.termination_reason = reason
        experiment.error = error
        experiment.set_status(ExperimentStatus.FINISHED)
        experiment._candidates, experiment._outcomes = [], {}
        conduit.unregister(experiment.name)
        if error:
            logger.error(f"Experiment '{experiment.name}' aborted: {error}")
        else:
            logger.info(
                f"Experiment '{experiment.name}' finished after {experiment.generation} generation(s), "
                f"{experiment.evaluations} evaluation(s): {reason}"
            )

    def _begin_generation(self, experiment: Experiment, conduit: Conduit) -> None:
        while True:
            reason = check_termination(experiment)
            if reason:
                self._finish(experiment, conduit, reason)
                return
            try:
                candidates = experiment.solver.generate()
            except SolverError as e:
                self._finish(experiment, conduit, error=f"{type(e).__name__}: {e}")
                return
            except Exception as e:
                logger.exception(f"Unexpected failure generating samples of '{experiment.name}'")
                self._finish(experiment, conduit, error=f"{type(e).__name__}: {e}")
                return

            cap = experiment.solver.criteria.max_model_evaluations
            if cap is not None and experiment.evaluations + len(candidates) > cap:
                self._finish(experiment, conduit, f"Max Model Evaluations ({cap}) would be exceeded")
                return

            experiment._candidates = candidates
            experiment._outcomes = {}
            experiment._generation_started_at = time.monotonic()
            if candidates:
                conduit.submit(experiment.name, self._preprocess(experiment, candidates))
                return
            # Nothing to evaluate this generation (every proposal rejected up front)
            if not self._complete_generation(experiment, conduit, begin_next=False):
                return

    @staticmethod
    def _preprocess(experiment: Experiment, candidates: List[np.ndarray]) -> List[Sample]:
        generation = experiment.generation
        return [
            Sample(
                experiment.name,
                f"{generation}-{index}",
                [float(x) for x in params],
                experiment.space.to_named(params),
            )
            for index, params in enumerate(candidates)
        ]

    @staticmethod
    def _evaluate(experiment: Experiment, params: np.ndarray, outcome: SampleOutcome) -> Evaluation:
        if outcome.failed:
            return Evaluation.rejected()
        try:
            return experiment.problem.evaluate(params, outcome.result or {})
        except ProblemError as e:
            logger.warning(f"Sample {outcome.sample_id} of '{experiment.name}' rejected: {e}")
            return Evaluation.rejected()

    def _complete_generation(self, experiment: Experiment, conduit: Conduit, begin_next: bool = True) -> bool:
        """Update, store and (optionally) start the next generation. False once the experiment finished."""
        generation = experiment.generation
        experiment.evaluations += len(experiment._candidates)
        try:
            evaluations = [
                self._evaluate(experiment, params, experiment._outcomes[f"{generation}-{index}"])
                for index, params in enumerate(experiment._candidates)
            ]
            experiment.solver.update(evaluations)
            experiment.store.save(generation, experiment.checkpoint_payload())
        except (SolverError, CheckpointError) as e:
            self._finish(experiment, conduit, error=f"{type(e).__name__}: {e}")
            return False
        except Exception as e:
            logger.exception(f"Unexpected failure in generation {generation} of '{experiment.name}'")
            self._finish(experiment, conduit, error=f"{type(e).__name__}: {e}")
            return False

        value, parameters = experiment.solver.best()
        experiment.trajectory.append(parameters)
        row = {"Generation": generation, **experiment.solver.summary_fields(),
               "Evaluations": experiment.evaluations,
               "Wall Time": round(time.monotonic() - experiment._generation_started_at, 6)}
        try:
            append_summary(experiment.summary_path, row)
        except OSError as e:
            self._finish(experiment, conduit, error=f"Cannot write summary: {e}")
            return False
        logger.info(f"Experiment '{experiment.name}' generation {generation} done, best {value}")

        experiment._candidates, experiment._outcomes = [], {}
        if begin_next:
            self._begin_generation(experiment, conduit)
        return experiment.status == ExperimentStatus.RUNNING


def engine_run(experiments: Union[Experiment, Sequence[Experiment]], **engine_options: Any) -> List[Experiment]:
    return Engine(**engine_options).run(experiments)


def checkpoint_resume(path: Union[str, Path], model: Optional[Callable] = None) -> Experiment:
    return Experiment.from_checkpoint(path, model=model)


def run_in_stints(
    experiment: Experiment, engine: Engine, stint: int = 1, model: Optional[Callable] = None
) -> List[Experiment]:
    """
    Run to completion, stopping after every ``stint`` generations and resuming
    from the latest checkpoint as a separate run would.

    Returns:
        The experiment object of every stint, the final one last
    """
    if stint < 1:
        raise ValueError(f"Stint must be at least one generation, got {stint}")
    stints = [experiment]
    experiment.limit_generations(stint)
    engine.run([experiment])
    while experiment.interrupted and experiment.error is None:
        experiment = Experiment.from_checkpoint(experiment.directory, model=model)
        experiment.limit_generations(stint)
        engine.run([experiment])
        stints.append(experiment)
    return stints

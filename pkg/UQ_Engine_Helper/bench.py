"""
Synthetic wait benchmark and efficiency instrumentation.

Every bench experiment is a one-variable optimization whose model only
waits (really, or on the simulated clock) and returns a random value.
Wait times and results come from streams keyed by experiment and sample,
so they do not depend on which worker runs a sample or when.
"""

import logging
import statistics
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from utils.config import RESULTS_ROOT

from .conduit import Conduit, ThreadConduit
from .config import Config
from .engine import Engine, Experiment
from .rng import RngStream
from .sample import Sample
from .simulated_conduit import TICKS_PER_SECOND, SimulatedConduit

logger = logging.getLogger(__name__)

_CONFIG = Config()


class WaitMode(str, Enum):
    FIXED = "Fixed"
    UNIFORM_RANGE = "UniformRange"


class Clock(str, Enum):
    REAL = "real"
    SIMULATED = "sim"


class SchedulingKind(str, Enum):
    SINGLE = "single"
    MULTIPLE = "multiple"


@dataclass(frozen=True)
class WaitModel:
    """How long a bench sample keeps its worker busy."""
    mode: WaitMode
    low: float
    high: float
    clock: Clock = Clock.SIMULATED
    seed: int = 0

    def __post_init__(self):
        if self.low < 0:
            raise ValueError(f"Wait times must be non-negative, got {self.low}")
        if self.mode == WaitMode.UNIFORM_RANGE and not self.low < self.high:
            raise ValueError(f"UniformRange needs lo < hi, got ({self.low}, {self.high})")

    @classmethod
    def fixed(cls, seconds: float, clock: Clock = Clock.SIMULATED, seed: int = 0) -> "WaitModel":
        return cls(WaitMode.FIXED, seconds, seconds, Clock(clock), seed)

    @classmethod
    def uniform(cls, low: float, high: float, clock: Clock = Clock.SIMULATED, seed: int = 0) -> "WaitModel":
        return cls(WaitMode.UNIFORM_RANGE, low, high, Clock(clock), seed)

    def with_seed(self, seed: int) -> "WaitModel":
        return WaitModel(self.mode, self.low, self.high, self.clock, seed)

    def duration(self, experiment_id: str, sample_id: str) -> float:
        if self.mode == WaitMode.FIXED:
            return self.low
        stream = RngStream(self.seed, f"bench/wait/{experiment_id}/{sample_id}")
        return float(stream.uniform(self.low, self.high))

    def duration_of(self, sample: Sample) -> float:
        return self.duration(sample.experiment_id, sample.sample_id)


class WaitingModel:
    """Computational model of the benchmark: wait, then report a random ``F(x)``."""

    def __init__(self, wait: WaitModel):
        self.wait = wait
        self.total_wait = 0.0
        self._lock = threading.Lock()

    def __call__(self, sample) -> None:
        experiment_id, sample_id = sample["Experiment Id"], sample["Sample Id"]
        if self.wait.clock == Clock.REAL:
            seconds = self.wait.duration(experiment_id, sample_id)
            time.sleep(seconds)
            with self._lock:
                self.total_wait += seconds
        stream = RngStream(self.wait.seed, f"bench/result/{experiment_id}/{sample_id}")
        sample[_CONFIG.OBJECTIVE_KEY] = float(stream.uniform(-1.0, 1.0))


@dataclass(frozen=True)
class Scheduling:
    kind: SchedulingKind = SchedulingKind.SINGLE
    experiments: int = 1

    def __post_init__(self):
        if self.experiments < 1:
            raise ValueError(f"Scheduling needs at least one experiment, got {self.experiments}")

    @classmethod
    def single(cls, experiments: int = 1) -> "Scheduling":
        return cls(SchedulingKind.SINGLE, experiments)

    @classmethod
    def multiple(cls, experiments: int) -> "Scheduling":
        return cls(SchedulingKind.MULTIPLE, experiments)

    def label(self) -> str:
        if self.kind == SchedulingKind.MULTIPLE:
            return f"Multiple({self.experiments})"
        return "Single" if self.experiments == 1 else f"Single x{self.experiments}"


@dataclass
class EfficiencyReport:
    """Timing of one bench run; both efficiency definitions are reported."""
    workers: int
    generations: int
    population: int
    scheduling: str
    clock: str
    ideal_time: float
    makespan: float
    busy_time: float
    evaluations: int
    intervals: List[Tuple[int, float, float, str]] = field(default_factory=list)

    @property
    def node_time(self) -> float:
        return self.workers * self.makespan

    @property
    def idle_time(self) -> float:
        return self.node_time - self.busy_time

    @property
    def e_ideal(self) -> float:
        return self.ideal_time / self.makespan if self.makespan > 0 else 0.0

    @property
    def e_busy(self) -> float:
        return self.busy_time / self.node_time if self.makespan > 0 else 0.0

    def as_row(self) -> Dict[str, Any]:
        return {
            "Workers": self.workers,
            "Generations": self.generations,
            "Population": self.population,
            "Scheduling": self.scheduling,
            "Clock": self.clock,
            "Evaluations": self.evaluations,
            "Ideal Time": self.ideal_time,
            "Makespan": self.makespan,
            "Busy Time": self.busy_time,
            "Idle Time": self.idle_time,
            "e_ideal": self.e_ideal,
            "e_busy": self.e_busy,
        }


def bench_experiment_config(population: int, generations: int, seed: int) -> Dict[str, Any]:
    return {
        "Random Seed": seed,
        "Problem": {"Type": "Optimization", "Computational Model": None},
        "Variables": [{"Name": "X", "Lower Bound": -1.0, "Upper Bound": 1.0}],
        "Solver": {"Type": "CMAES", "Population Size": population, "Max Generations": generations},
        "File Output": {"Keep Checkpoints": 1},
    }


def bench_run(
    workers: int,
    generations: int,
    wait: WaitModel,
    scheduling: Optional[Scheduling] = None,
    population_factor: int = 4,
    out_dir: Optional[Union[str, Path]] = None,
    seed: int = 0,
) -> EfficiencyReport:
    """
    Run the wait benchmark through the engine and a conduit.

    Args:
        workers: Worker count N >= 1
        generations: Generations G per experiment
        wait: Wait model; its clock selects the thread or simulated conduit
        scheduling: Single runs the experiments one after another, Multiple together
        population_factor: Samples per generation per worker
        out_dir: Where the bench experiments write their results
        seed: Seed of the bench experiments and their wait/result streams

    Returns:
        EfficiencyReport with the per-worker busy intervals
    """
    if workers < 1:
        raise ValueError(f"Bench needs at least one worker, got {workers}")
    scheduling = scheduling or Scheduling.single()
    population = population_factor * workers
    wait = wait.with_seed(seed)
    model = WaitingModel(wait)
    root = Path(out_dir or RESULTS_ROOT) / "bench"

    experiments = []
    for index in range(scheduling.experiments):
        config = bench_experiment_config(population, generations, seed + index)
        experiments.append(Experiment(config, name=f"bench-{index}", model=model, results_root=root))

    simulated = wait.clock == Clock.SIMULATED
    if simulated:
        conduit: Conduit = SimulatedConduit(workers, duration=wait.duration_of, seed=seed)
    else:
        conduit = ThreadConduit(workers)
    engine = Engine(conduit=conduit, poll_timeout=None if simulated else 1.0)

    logger.info(f"Bench: {workers} worker(s), {generations} generation(s), population {population}, "
                f"{scheduling.label()}, {wait.mode.value} wait, {wait.clock.value} clock")
    with conduit:
        started = conduit.now_ticks() if simulated else conduit.now()
        if scheduling.kind == SchedulingKind.MULTIPLE:
            engine.run(experiments)
        else:
            for experiment in experiments:
                engine.run([experiment])
        ended = conduit.now_ticks() if simulated else conduit.now()

    intervals = sorted(
        (worker.worker_id, start, end, experiment_id)
        for worker in conduit.workers
        for start, end, experiment_id in worker.busy_intervals
    )
    if simulated:
        makespan = (ended - started) / TICKS_PER_SECOND
        ideal = (conduit.work_ticks / workers) / TICKS_PER_SECOND
        busy = conduit.work_ticks / TICKS_PER_SECOND
    else:
        makespan = ended - started
        ideal = model.total_wait / workers
        busy = sum(end - start for _, start, end, _ in intervals)

    report = EfficiencyReport(
        workers=workers,
        generations=generations,
        population=population,
        scheduling=scheduling.label(),
        clock=wait.clock.value,
        ideal_time=ideal,
        makespan=makespan,
        busy_time=busy,
        evaluations=sum(e.evaluations for e in experiments),
        intervals=intervals,
    )
    logger.info(f"Bench done: makespan {report.makespan:.4f}s, e_ideal {report.e_ideal:.4f}, e_busy {report.e_busy:.4f}")
    return report


def weak_scaling_sweep(
    worker_counts: Sequence[int],
    repetitions: int,
    generations: int,
    wait: WaitModel,
    scheduling: Optional[Scheduling] = None,
    population_factor: int = 4,
    out_dir: Optional[Union[str, Path]] = None,
    seed: int = 0,
) -> pd.DataFrame:
    """Median, min and max efficiency over ``repetitions`` bench runs per worker count."""
    if repetitions < 1:
        raise ValueError(f"Repetitions must be at least 1, got {repetitions}")
    rows = []
    for workers in worker_counts:
        reports = [
            bench_run(workers, generations, wait, scheduling, population_factor, out_dir, seed + rep)
            for rep in range(repetitions)
        ]
        e_ideal = [r.e_ideal for r in reports]
        e_busy = [r.e_busy for r in reports]
        rows.append({
            "Workers": workers,
            "Repetitions": repetitions,
            "Median e_ideal": statistics.median(e_ideal),
            "Min e_ideal": min(e_ideal),
            "Max e_ideal": max(e_ideal),
            "Median e_busy": statistics.median(e_busy),
        })
        logger.info(f"Sweep: {workers} worker(s), median e_ideal {rows[-1]['Median e_ideal']:.4f}")
    return pd.DataFrame(rows)

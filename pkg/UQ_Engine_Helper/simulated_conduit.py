"""
Discrete-event worker pool on a simulated clock.

Models are evaluated in-process at assignment time; the worker then stays
Busy for the sample's simulated duration before its message is delivered.
Time is kept in integer microseconds so that efficiency ratios of fixed
waits come out exact. Crash injection draws from the conduit's own stream,
so a seed and a duration schedule fix the whole assignment sequence.
"""

import logging
import math
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import simpy

from .concurrent_model import ModelBinding, evaluate_sample
from .conduit import Conduit, WorkerHandle
from .rng import RngStream
from .sample import Sample

logger = logging.getLogger(__name__)

TICKS_PER_SECOND = 1_000_000

DurationSource = Union[float, Callable[[Sample], float]]


def to_ticks(seconds: float) -> int:
    return int(round(seconds * TICKS_PER_SECOND))


class SimulatedConduit(Conduit):
    """
    Simulated-clock pool backed by a simpy environment.

    Args:
        workers: Number of worker teams
        team_size: Ranks per team
        max_attempts: Attempts per sample before a crash is reported as failure
        duration: Seconds a sample occupies its worker, constant or per sample
        crash_rate: Probability that an assignment ends in a worker crash
        seed: Seed of the conduit stream used for crash injection
        poll_interval: Engine polling period in seconds; 0 reacts to every event
    """

    MODE = "Simulated"

    def __init__(
        self,
        workers: int,
        team_size: int = 1,
        max_attempts: int = 2,
        duration: DurationSource = 1.0,
        crash_rate: float = 0.0,
        seed: int = 0,
        poll_interval: float = 0.0,
    ):
        super().__init__(workers, team_size, max_attempts)
        if not 0.0 <= crash_rate < 1.0:
            raise ValueError(f"Crash rate must be in [0, 1), got {crash_rate}")
        self.env = simpy.Environment()
        self.duration = duration
        self.crash_rate = crash_rate
        self.rng = RngStream(seed, "conduit/simulated")
        self.poll_interval_ticks = to_ticks(poll_interval)
        self.work_ticks = 0
        self.crashes = 0
        self._outbox: List[Tuple[int, Dict[str, Any]]] = []

    def now(self) -> float:
        return self.env.now / TICKS_PER_SECOND

    def now_ticks(self) -> int:
        return int(self.env.now)

    def _spawn(self) -> None:
        pass

    def _shutdown(self) -> None:
        pass

    def _duration_of(self, sample: Sample) -> int:
        seconds = self.duration(sample) if callable(self.duration) else self.duration
        return to_ticks(seconds)

    def _launch(self, worker: WorkerHandle, sample: Sample, binding: ModelBinding) -> None:
        ticks = self._duration_of(sample)
        crashed = self.crash_rate > 0 and float(self.rng.random()) < self.crash_rate
        if crashed:
            self.crashes += 1
            message: Dict[str, Any] = {"crashed": True}
        else:
            try:
                message = {"result": evaluate_sample(binding, sample.model_input(), worker.worker_id), "error": None}
            except Exception as e:
                message = {"result": None, "error": f"{type(e).__name__}: {e}"}
        self.work_ticks += ticks
        self.env.process(self._occupy(worker.worker_id, ticks, message))

    def _occupy(self, worker_id: int, ticks: int, message: Dict[str, Any]):
        yield self.env.timeout(ticks)
        self._outbox.append((worker_id, dict(message, finished_at=self.now())))

    def _poll(self, block: bool, timeout: Optional[float]) -> List[Tuple[int, Dict[str, Any]]]:
        if block:
            deadline = None if timeout is None else self.env.now + to_ticks(timeout)
            while not self._outbox and self.env.peek() != math.inf:
                if deadline is not None and self.env.peek() > deadline:
                    if deadline > self.env.now:
                        self.env.run(until=deadline)
                    break
                self.env.step()
            # Everything finishing at the same instant is reported together
            while self._outbox and self.env.peek() == self.env.now:
                self.env.step()
            if self._outbox and self.poll_interval_ticks:
                next_poll = -(-self.env.now // self.poll_interval_ticks) * self.poll_interval_ticks
                if next_poll > self.env.now:
                    self.env.run(until=next_poll)
        messages, self._outbox = self._outbox, []
        return messages

"""
Distribution conduit: one common queue of pending samples served to a pool
of workers.

The control context (the engine's thread) owns the queue and the worker
table. Workers only exchange messages with it; every state change of a
worker happens here, in ``dispatch_step`` (Idle -> Busy), while absorbing
worker messages (Busy -> Pending) and in ``collect`` (Pending -> Idle).
"""

import logging
import queue
import re
import threading
import time
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Deque, Dict, Iterable, List, Optional, Tuple

from .concurrent_model import ModelBinding, evaluate_sample
from .exceptions import ConduitError, UnknownExperimentError, WorkerCrashedError
from .sample import Sample, SampleOutcome, SampleStatus

logger = logging.getLogger(__name__)


class WorkerState(str, Enum):
    IDLE = "Idle"
    BUSY = "Busy"
    PENDING = "Pending"


LEGAL_TRANSITIONS = {
    (WorkerState.IDLE, WorkerState.BUSY),
    (WorkerState.BUSY, WorkerState.PENDING),
    (WorkerState.PENDING, WorkerState.IDLE),
}

_LOG_LETTERS = {WorkerState.IDLE: "I", WorkerState.BUSY: "B", WorkerState.PENDING: "P"}
_LOG_PATTERN = re.compile(r"(IBP)*I?")


@dataclass
class WorkerHandle:
    """Conduit-side record of one worker team."""
    worker_id: int
    team_size: int = 1
    state: WorkerState = WorkerState.IDLE
    current: Optional[Sample] = None
    message: Optional[Dict[str, Any]] = None
    busy_since: Optional[float] = None
    busy_intervals: List[Tuple[float, float, str]] = field(default_factory=list)
    transitions: List[WorkerState] = field(default_factory=list)

    def transition(self, new_state: WorkerState) -> None:
        if (self.state, new_state) not in LEGAL_TRANSITIONS:
            raise ConduitError(f"Illegal transition {self.state.value} -> {new_state.value} for worker {self.worker_id}")
        self.state = new_state
        self.transitions.append(new_state)

    def state_log(self) -> List[WorkerState]:
        """Every state the worker has been in, starting with the initial Idle."""
        return [WorkerState.IDLE] + self.transitions

    @property
    def busy_time(self) -> float:
        return sum(end - start for start, end, _ in self.busy_intervals)


def validate_transition_log(states: Iterable[WorkerState]) -> bool:
    """True if the state sequence matches (Idle Busy Pending)* Idle?."""
    letters = "".join(_LOG_LETTERS[WorkerState(s)] for s in states)
    return _LOG_PATTERN.fullmatch(letters) is not None


class PendingQueue:
    """FIFO of samples from every active experiment."""

    def __init__(self):
        self._items: Deque[Sample] = deque()

    def push(self, sample: Sample) -> None:
        sample.status = SampleStatus.QUEUED
        self._items.append(sample)

    def pop(self) -> Sample:
        return self._items.popleft()

    def __len__(self) -> int:
        return len(self._items)

    def __bool__(self) -> bool:
        return bool(self._items)

    def experiments(self) -> List[str]:
        """Experiment ids in the queue, in first-appearance order."""
        seen: List[str] = []
        for sample in self._items:
            if sample.experiment_id not in seen:
                seen.append(sample.experiment_id)
        return seen


def teams_for_processes(total_processes: int, team_size: int) -> int:
    """Worker teams of ``team_size`` ranks after reserving one rank for the engine."""
    if total_processes < 2 or team_size < 1:
        raise ValueError(f"Need at least one engine rank and one worker rank, got {total_processes}")
    return (total_processes - 1) // team_size


class Conduit(ABC):
    """Base class of sample distribution back-ends."""

    MODE = ""

    def __init__(self, workers: int, team_size: int = 1, max_attempts: int = 2):
        if workers < 1:
            raise ValueError(f"Worker count must be at least 1, got {workers}")
        if team_size < 1:
            raise ValueError(f"Team size must be at least 1, got {team_size}")
        self.team_size = team_size
        self.max_attempts = max_attempts
        self.workers = [WorkerHandle(worker_id, team_size) for worker_id in range(workers)]
        self.queue = PendingQueue()
        self.bindings: Dict[str, ModelBinding] = {}
        self.assignment_log: List[Tuple[float, int, str, str]] = []
        self.started = False

    # Lifecycle

    def start(self) -> "Conduit":
        if not self.started:
            self._spawn()
            self.started = True
            logger.info(f"{self.MODE} conduit started with {len(self.workers)} worker(s) of team size {self.team_size}")
        return self

    def stop(self) -> None:
        if self.started:
            if self.outstanding():
                logger.warning(f"{self.MODE} conduit stopping with {self.outstanding()} sample(s) outstanding")
            broken = [wid for wid, log in self.transition_logs().items() if not validate_transition_log(log)]
            if broken:
                logger.warning(f"Workers {broken} have an unfinished or illegal state log")
            self._shutdown()
            self.started = False
            logger.info(f"{self.MODE} conduit stopped")

    def __enter__(self) -> "Conduit":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    def register(self, experiment_id: str, binding: ModelBinding) -> None:
        self.bindings[experiment_id] = binding

    def unregister(self, experiment_id: str) -> None:
        self.bindings.pop(experiment_id, None)

    # Operations

    def submit(self, experiment_id: str, samples: Iterable[Sample]) -> int:
        """Append samples to the common queue."""
        if experiment_id not in self.bindings:
            raise UnknownExperimentError(f"Experiment '{experiment_id}' has no model binding")
        count = 0
        for sample in samples:
            if sample.experiment_id != experiment_id:
                raise ConduitError(f"Sample {sample.sample_id} belongs to '{sample.experiment_id}', not '{experiment_id}'")
            self.queue.push(sample)
            count += 1
        if count:
            logger.debug(
                f"Experiment '{experiment_id}' queued {count} sample(s); queue length {len(self.queue)}, "
                f"experiments {self.queue.experiments()}"
            )
        return count

    def idle_workers(self) -> List[WorkerHandle]:
        return [w for w in self.workers if w.state == WorkerState.IDLE]

    def dispatch_step(self) -> int:
        """Pair the front of the queue with the lowest-id idle worker until one runs out."""
        assignments = 0
        while self.queue:
            idle = self.idle_workers()
            if not idle:
                break
            worker = idle[0]
            sample = self.queue.pop()
            binding = self.bindings.get(sample.experiment_id)
            if binding is None:
                raise UnknownExperimentError(f"Experiment '{sample.experiment_id}' was unregistered with queued samples")
            now = self.now()
            worker.transition(WorkerState.BUSY)
            worker.current = sample
            worker.busy_since = now
            sample.status = SampleStatus.RUNNING
            sample.attempts += 1
            self.assignment_log.append((now, worker.worker_id, sample.experiment_id, sample.sample_id))
            self._launch(worker, sample, binding)
            assignments += 1
        return assignments

    def collect(self) -> List[SampleOutcome]:
        """Retrieve the result of every Pending worker and return it to Idle."""
        self._absorb(self._poll(block=False, timeout=None))
        outcomes: List[SampleOutcome] = []
        for worker in self.workers:
            if worker.state != WorkerState.PENDING:
                continue
            sample, message = worker.current, worker.message or {}
            worker.current = None
            worker.message = None
            worker.transition(WorkerState.IDLE)

            if message.get("crashed"):
                error = WorkerCrashedError(worker.worker_id, sample.sample_id)
                if sample.attempts < self.max_attempts:
                    logger.warning(f"{error}; re-queueing (attempt {sample.attempts} of {self.max_attempts})")
                    self.queue.push(sample)
                    continue
                logger.warning(f"{error}; sample failed after {sample.attempts} attempt(s)")
                outcomes.append(self._fail(sample, str(error), worker.worker_id))
            elif message.get("error"):
                logger.warning(f"Sample {sample.sample_id} of '{sample.experiment_id}' failed: {message['error']}")
                outcomes.append(self._fail(sample, message["error"], worker.worker_id))
            else:
                sample.status = SampleStatus.FINISHED
                sample.result = message.get("result") or {}
                outcomes.append(SampleOutcome(sample.experiment_id, sample.sample_id, sample.result,
                                              worker_id=worker.worker_id))
        return outcomes

    def wait(self, timeout: Optional[float] = None) -> None:
        """Block until at least one busy worker reports (or the timeout passes)."""
        if not any(w.state == WorkerState.BUSY for w in self.workers):
            return
        self._absorb(self._poll(block=True, timeout=timeout))

    def outstanding(self) -> int:
        return len(self.queue) + sum(1 for w in self.workers if w.state != WorkerState.IDLE)

    def transition_logs(self) -> Dict[int, List[WorkerState]]:
        return {w.worker_id: w.state_log() for w in self.workers}

    # Helpers

    @staticmethod
    def _fail(sample: Sample, error: str, worker_id: Optional[int]) -> SampleOutcome:
        sample.status = SampleStatus.FAILED
        return SampleOutcome(sample.experiment_id, sample.sample_id, None, failed=True, error=error, worker_id=worker_id)

    def _absorb(self, messages: List[Tuple[int, Dict[str, Any]]]) -> None:
        for worker_id, message in messages:
            worker = self.workers[worker_id]
            finished = message.get("finished_at", self.now())
            worker.transition(WorkerState.PENDING)
            worker.message = message
            worker.busy_intervals.append((worker.busy_since, finished, worker.current.experiment_id))
            worker.busy_since = None

    # Back-end hooks

    @abstractmethod
    def now(self) -> float:
        """Seconds on this conduit's clock."""

    @abstractmethod
    def _spawn(self) -> None:
        """Start the workers."""

    @abstractmethod
    def _shutdown(self) -> None:
        """Stop the workers."""

    @abstractmethod
    def _launch(self, worker: WorkerHandle, sample: Sample, binding: ModelBinding) -> None:
        """Hand one sample to a worker."""

    @abstractmethod
    def _poll(self, block: bool, timeout: Optional[float]) -> List[Tuple[int, Dict[str, Any]]]:
        """Worker messages ``(worker_id, {"result"|"error"|"crashed": ...})`` received so far."""


class ThreadConduit(Conduit):
    """In-process workers: one thread per worker, messages over queues."""

    MODE = "Thread"

    def __init__(self, workers: int, team_size: int = 1, max_attempts: int = 2):
        super().__init__(workers, team_size, max_attempts)
        self._origin = time.monotonic()
        self._outbox: "queue.Queue[Tuple[int, Dict[str, Any]]]" = queue.Queue()
        self._inboxes: List["queue.Queue"] = []
        self._threads: List[threading.Thread] = []

    def now(self) -> float:
        return time.monotonic() - self._origin

    def _spawn(self) -> None:
        for worker in self.workers:
            inbox: "queue.Queue" = queue.Queue()
            thread = threading.Thread(
                target=self._worker_loop, args=(worker.worker_id, inbox),
                name=f"uq-worker-{worker.worker_id}", daemon=True,
            )
            self._inboxes.append(inbox)
            self._threads.append(thread)
            thread.start()

    def _shutdown(self) -> None:
        for inbox in self._inboxes:
            inbox.put(None)
        for thread in self._threads:
            thread.join(timeout=5)
        self._inboxes, self._threads = [], []

    def _worker_loop(self, worker_id: int, inbox: "queue.Queue") -> None:
        while True:
            item = inbox.get()
            if item is None:
                break
            sample, binding = item
            try:
                result = evaluate_sample(binding, sample, worker_id)
                self._outbox.put((worker_id, {"result": result, "error": None}))
            except Exception as e:
                self._outbox.put((worker_id, {"result": None, "error": f"{type(e).__name__}: {e}"}))

    def _launch(self, worker: WorkerHandle, sample: Sample, binding: ModelBinding) -> None:
        self._inboxes[worker.worker_id].put((sample.model_input(), binding))

    def _poll(self, block: bool, timeout: Optional[float]) -> List[Tuple[int, Dict[str, Any]]]:
        messages = []
        if block:
            try:
                messages.append(self._outbox.get(timeout=timeout))
            except queue.Empty:
                return messages
        while True:
            try:
                messages.append(self._outbox.get_nowait())
            except queue.Empty:
                break
        return messages


def conduit_start(workers: int, team_size: int = 1, mode: str = "thread", **options: Any) -> Conduit:
    """
    Create and start a worker pool.

    Args:
        workers: Number of worker teams k >= 1
        team_size: Ranks per worker team m >= 1
        mode: "thread" (in-process), "process" (separate OS processes) or "simulated"
        options: Back-end specific options

    Returns:
        A started conduit with every worker Idle
    """
    if mode == "thread":
        conduit: Conduit = ThreadConduit(workers, team_size, **options)
    elif mode == "process":
        from .process_conduit import ProcessConduit
        conduit = ProcessConduit(workers, team_size, **options)
    elif mode == "simulated":
        from .simulated_conduit import SimulatedConduit
        conduit = SimulatedConduit(workers, team_size, **options)
    else:
        raise ValueError(f"Unknown conduit mode '{mode}'")
    return conduit.start()

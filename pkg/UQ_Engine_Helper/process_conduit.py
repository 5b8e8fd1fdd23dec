"""
Worker pool of separate OS processes.

Each worker is a spawned process holding one end of a socket pair; the
control context keeps the other end and exchanges ``wire`` frames with it.
A worker that dies (end of stream or a broken frame) is reported as crashed
and replaced by a fresh process under the same id.
"""

import logging
import multiprocessing
import multiprocessing.connection
import os
import socket
import time
from typing import Any, Dict, List, Optional, Tuple

from utils.config import WORKER_ID_ENV_VAR

from .concurrent_model import ModelBinding, evaluate_sample
from .conduit import Conduit, WorkerHandle, WorkerState
from .exceptions import FrameError, ModelExecutionError, SpawnFailureError
from .sample import ModelSample, Sample
from .wire import read_frame, send_frame

logger = logging.getLogger(__name__)


def worker_process_main(channel: socket.socket, worker_id: int) -> None:
    """Entry point of a worker process: evaluate assigned samples until told to stop."""
    os.environ[WORKER_ID_ENV_VAR] = str(worker_id)
    send_frame(channel, "ready", worker_id=worker_id)
    while True:
        frame = read_frame(channel)
        if frame is None or frame["kind"] == "stop":
            break
        sample = ModelSample(frame["experiment_id"], frame["sample_id"], frame["parameters"], frame["variables"])
        try:
            binding = ModelBinding.from_message(frame["model"])
            result, error = evaluate_sample(binding, sample, worker_id), None
        except Exception as e:
            result, error = None, f"{type(e).__name__}: {e}"
        try:
            send_frame(channel, "result", experiment_id=frame["experiment_id"], sample_id=frame["sample_id"],
                       result=result, error=error)
        except (TypeError, ValueError) as e:
            send_frame(channel, "result", experiment_id=frame["experiment_id"], sample_id=frame["sample_id"],
                       result=None, error=f"Result not serializable: {e}")
    channel.close()


class ProcessConduit(Conduit):
    """Workers in spawned processes, messages as length-prefixed frames."""

    MODE = "Process"

    def __init__(self, workers: int, team_size: int = 1, max_attempts: int = 2, start_timeout: float = 30.0):
        super().__init__(workers, team_size, max_attempts)
        self.start_timeout = start_timeout
        self.respawns = 0
        self._origin = time.monotonic()
        self._context = multiprocessing.get_context("spawn")
        self._processes: Dict[int, Any] = {}
        self._channels: Dict[int, socket.socket] = {}
        self._local: List[Tuple[int, Dict[str, Any]]] = []

    def now(self) -> float:
        return time.monotonic() - self._origin

    def _spawn(self) -> None:
        for worker in self.workers:
            self._start_worker(worker.worker_id)

    def _start_worker(self, worker_id: int) -> None:
        parent, child = socket.socketpair()
        process = self._context.Process(
            target=worker_process_main, args=(child, worker_id), name=f"uq-worker-{worker_id}", daemon=True,
        )
        try:
            process.start()
        except OSError as e:
            parent.close()
            child.close()
            raise SpawnFailureError(worker_id, str(e))
        child.close()

        parent.settimeout(self.start_timeout)
        try:
            frame = read_frame(parent)
        except (OSError, FrameError) as e:
            logger.debug(f"Worker {worker_id} handshake failed: {e}")
            frame = None
        if frame is None or frame["kind"] != "ready":
            process.terminate()
            parent.close()
            raise SpawnFailureError(worker_id, "no ready frame received")
        parent.settimeout(None)

        self._processes[worker_id] = process
        self._channels[worker_id] = parent
        logger.debug(f"Worker {worker_id} started as pid {process.pid}")

    def _restart(self, worker_id: int) -> None:
        old = self._processes.pop(worker_id, None)
        channel = self._channels.pop(worker_id, None)
        if channel is not None:
            channel.close()
        if old is not None:
            old.join(timeout=1)
            if old.is_alive():
                old.terminate()
        self.respawns += 1
        logger.warning(f"Respawning worker {worker_id}")
        self._start_worker(worker_id)

    def _shutdown(self) -> None:
        for channel in self._channels.values():
            try:
                send_frame(channel, "stop")
            except OSError:
                pass
        for process in self._processes.values():
            process.join(timeout=5)
            if process.is_alive():
                process.terminate()
        for channel in self._channels.values():
            channel.close()
        self._processes, self._channels = {}, {}

    def _launch(self, worker: WorkerHandle, sample: Sample, binding: ModelBinding) -> None:
        try:
            model = binding.to_message()
        except ModelExecutionError as e:
            self._local.append((worker.worker_id, {"result": None, "error": str(e)}))
            return
        try:
            send_frame(self._channels[worker.worker_id], "assign", model=model, **sample.to_message())
        except OSError as e:
            logger.warning(f"Cannot reach worker {worker.worker_id}: {e}")
            self._local.append((worker.worker_id, {"crashed": True}))
            self._restart(worker.worker_id)

    def _poll(self, block: bool, timeout: Optional[float]) -> List[Tuple[int, Dict[str, Any]]]:
        messages, self._local = self._local, []
        reported = {worker_id for worker_id, _ in messages}
        waiting = {
            self._channels[w.worker_id]: w.worker_id
            for w in self.workers
            if w.state == WorkerState.BUSY and w.worker_id not in reported
        }
        if not waiting:
            return messages

        wait_for = timeout if block and not messages else 0
        for channel in multiprocessing.connection.wait(list(waiting), timeout=wait_for):
            worker_id = waiting[channel]
            try:
                frame = read_frame(channel)
            except (OSError, FrameError) as e:
                logger.debug(f"Worker {worker_id} stream broken: {e}")
                frame = None
            if frame is None:
                logger.warning(f"Worker {worker_id} exited while busy")
                messages.append((worker_id, {"crashed": True}))
                self._restart(worker_id)
            else:
                logger.debug(f"Worker {worker_id} reported sample {frame['sample_id']}")
                messages.append((worker_id, {"result": frame["result"], "error": frame["error"]}))
        return messages

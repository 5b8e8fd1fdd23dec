"""
Samples in flight and the container handed to computational models.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional


class SampleStatus(str, Enum):
    QUEUED = "Queued"
    RUNNING = "Running"
    FINISHED = "Finished"
    FAILED = "Failed"


@dataclass
class Sample:
    """One parameter vector tracked from generation to result."""
    experiment_id: str
    sample_id: str
    parameters: List[float]
    variables: Dict[str, float]
    status: SampleStatus = SampleStatus.QUEUED
    result: Optional[Dict[str, Any]] = None
    attempts: int = 0

    def model_input(self) -> "ModelSample":
        return ModelSample(self.experiment_id, self.sample_id, self.parameters, self.variables)

    def to_message(self) -> Dict[str, Any]:
        return {
            "experiment_id": self.experiment_id,
            "sample_id": self.sample_id,
            "parameters": list(self.parameters),
            "variables": dict(self.variables),
        }


class ModelSample(dict):
    """
    Mapping passed to computational models.

    Models read ``sample["Variables"][name]`` (or ``sample["Parameters"]``)
    and write their result keys, e.g. ``sample["F(x)"] = -x * x``.
    """

    INPUT_KEYS = ("Variables", "Parameters", "Sample Id", "Experiment Id")

    def __init__(self, experiment_id: str, sample_id: str, parameters: List[float], variables: Mapping[str, float]):
        super().__init__()
        self["Experiment Id"] = experiment_id
        self["Sample Id"] = sample_id
        self["Parameters"] = list(parameters)
        self["Variables"] = dict(variables)

    def results(self, returned: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
        """Keys written by the model, merged with a mapping it may have returned."""
        written = {k: v for k, v in self.items() if k not in self.INPUT_KEYS}
        if isinstance(returned, Mapping):
            written.update(returned)
        return written


@dataclass
class SampleOutcome:
    """A sample reported by the conduit exactly once: finished or failed."""
    experiment_id: str
    sample_id: str
    result: Optional[Dict[str, Any]] = None
    failed: bool = False
    error: Optional[str] = None
    worker_id: Optional[int] = None

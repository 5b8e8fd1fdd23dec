"""
Custom exceptions for UQ Engine Helper package.
"""

from typing import List, Optional, Sequence


class ValidationError(Exception):
    """Custom exception for experiment configuration errors."""

    def __init__(self, message: str, paths: Optional[Sequence[str]] = None):
        super().__init__(message)
        self.paths: List[str] = list(paths or [])


class UnknownKeyError(ValidationError):
    """One or more keys were not consumed by any module descriptor."""

    def __init__(self, paths: Sequence[str], suggestions: Optional[dict] = None):
        self.suggestions = dict(suggestions or {})
        hints = []
        for path in paths:
            hint = self.suggestions.get(path)
            hints.append(f"{path} (did you mean '{hint}'?)" if hint else path)
        super().__init__(f"Unknown configuration key(s): {', '.join(hints)}", paths)


class TypeMismatchError(ValidationError):
    """A configuration value has the wrong type or an invalid value."""

    def __init__(self, path: str, expected: str, got: object):
        self.expected = expected
        self.got = got
        super().__init__(f"{path}: expected {expected}, got {got!r}", [path])


class MissingRequiredError(ValidationError):
    """A required configuration key is absent."""

    def __init__(self, path: str):
        super().__init__(f"Missing required configuration key: {path}", [path])


class ProblemError(Exception):
    """Custom exception for problem/result contract errors."""
    pass


class MissingResultKeyError(ProblemError):
    """The model did not write a result key required by the problem type."""
    pass


class LengthMismatchError(ProblemError):
    """Reference data and model evaluations differ in length."""
    pass


class UnresolvedPriorError(ProblemError):
    """A variable references a prior distribution that was not declared."""
    pass


class MalformedResultError(ProblemError):
    """A model result entry has the wrong type or shape."""
    pass


class SolverError(Exception):
    """Custom exception for solver errors."""
    pass


class DegenerateCovarianceError(SolverError):
    """Covariance matrix is not positive definite after re-conditioning."""
    pass


class NonFiniteObjectiveCountError(SolverError):
    """Every candidate of a generation evaluated to the rejection sentinel."""

    def __init__(self, count: int):
        self.count = count
        super().__init__(f"All {count} candidates have non-finite objective values")


class AllLikelihoodsNonFiniteError(SolverError):
    """No sample of the population has a finite log-likelihood."""
    pass


class ConduitError(Exception):
    """Custom exception for sample distribution errors."""
    pass


class SpawnFailureError(ConduitError):
    """A worker could not be started."""

    def __init__(self, worker_id: int, reason: str = ""):
        self.worker_id = worker_id
        super().__init__(f"Failed to spawn worker {worker_id}: {reason}".rstrip(": "))


class UnknownExperimentError(ConduitError):
    """Samples were submitted for an experiment with no model binding."""
    pass


class WorkerCrashedError(ConduitError):
    """A worker died while evaluating a sample."""

    def __init__(self, worker_id: int, sample_id: str):
        self.worker_id = worker_id
        self.sample_id = sample_id
        super().__init__(f"Worker {worker_id} crashed while evaluating sample {sample_id}")


class FrameError(ConduitError):
    """A transport frame was truncated or failed its schema check."""
    pass


class ModelExecutionError(ConduitError):
    """The computational model failed for one sample."""
    pass


class NonZeroExitError(ModelExecutionError):
    """An external model process exited with a nonzero status."""
    pass


class ParseFailureError(ModelExecutionError):
    """An external model produced output that could not be parsed."""
    pass


class ModelTimeoutError(ModelExecutionError):
    """An external model exceeded its time limit."""
    pass


class CheckpointError(Exception):
    """Custom exception for checkpoint errors."""
    pass


class VersionMismatchError(CheckpointError):
    """Checkpoint was written by an incompatible format version."""
    pass


class CorruptCheckpointError(CheckpointError):
    """Checkpoint is truncated, malformed or fails its checksum."""
    pass


class CheckpointIoError(CheckpointError):
    """Checkpoint could not be written or read."""
    pass


class ReportIoError(Exception):
    """Report, summary or timeline file could not be written or read."""
    pass

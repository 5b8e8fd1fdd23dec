"""
Model bindings and the fork/join Concurrent execution mode.

A Concurrent model is a shell command template. ``{VariableName}`` tokens
are replaced by the sample's parameter values, and ``{SampleId}`` /
``{ExperimentId}`` by its identifiers. The child reports either a bare real
on stdout (read as ``F(x)``) or a one-line JSON object with result keys,
on stdout or in a result file.
"""

import importlib
import json
import logging
import os
import re
import shlex
import subprocess
from dataclasses import dataclass
from typing import Any, Callable, Dict, Mapping, Optional

from utils.config import WORKER_ID_ENV_VAR

from .config import Config
from .exceptions import (
    ModelExecutionError,
    ModelTimeoutError,
    NonZeroExitError,
    ParseFailureError,
)
from .sample import ModelSample

logger = logging.getLogger(__name__)

_CONFIG = Config()
_TOKEN = re.compile(r"\{([^{}]+)\}")

IN_PROCESS = "InProcess"
CONCURRENT = "Concurrent"


def function_reference(function: Callable) -> Optional[str]:
    """``module:qualname`` if the callable can be re-imported by name, else ``None``."""
    module = getattr(function, "__module__", None)
    qualname = getattr(function, "__qualname__", None)
    if not module or not qualname or "<" in qualname or module == "__main__":
        return None
    return f"{module}:{qualname}"


def resolve_reference(reference: str) -> Callable:
    """Import ``module:qualname`` and return the callable."""
    module_name, _, qualname = reference.partition(":")
    if not module_name or not qualname:
        raise ModelExecutionError(f"Invalid model reference '{reference}', expected 'module:function'")
    try:
        target: Any = importlib.import_module(module_name)
        for part in qualname.split("."):
            target = getattr(target, part)
    except (ImportError, AttributeError) as e:
        raise ModelExecutionError(f"Cannot import model '{reference}': {e}")
    if not callable(target):
        raise ModelExecutionError(f"Model reference '{reference}' is not callable")
    return target


@dataclass(frozen=True)
class ModelBinding:
    """Which computational model runs the samples of one experiment."""
    mode: str
    function: Optional[Callable] = None
    reference: Optional[str] = None
    command: Optional[str] = None
    result_channel: str = "stdout"
    result_file: Optional[str] = None
    timeout: float = _CONFIG.DEFAULT_MODEL_TIMEOUT

    @classmethod
    def in_process(cls, function: Callable) -> "ModelBinding":
        return cls(IN_PROCESS, function=function, reference=function_reference(function))

    @classmethod
    def from_config(cls, model: Any) -> "ModelBinding":
        """Binding for a validated ``Problem/Computational Model`` value."""
        if callable(model):
            return cls.in_process(model)
        if model["Type"] == "Python":
            return cls(IN_PROCESS, reference=model["Function"])
        if model["Result Channel"] == "file" and not model.get("Result File"):
            raise ModelExecutionError("Concurrent model with file result channel needs a 'Result File'")
        return cls(
            CONCURRENT,
            command=model["Command"],
            result_channel=model["Result Channel"],
            result_file=model.get("Result File"),
            timeout=float(model["Timeout"]),
        )

    def resolve(self) -> Callable:
        if self.function is not None:
            return self.function
        if self.reference is None:
            raise ModelExecutionError("In-process binding has neither a function nor a reference")
        return resolve_reference(self.reference)

    def to_message(self) -> Dict[str, Any]:
        """Serializable description for worker processes."""
        if self.mode == IN_PROCESS and self.reference is None:
            raise ModelExecutionError(
                "In-process model is not importable by name; use a module-level function "
                "or a thread/simulated conduit"
            )
        return {
            "mode": self.mode,
            "reference": self.reference,
            "command": self.command,
            "result_channel": self.result_channel,
            "result_file": self.result_file,
            "timeout": self.timeout,
        }

    @classmethod
    def from_message(cls, message: Mapping[str, Any]) -> "ModelBinding":
        return cls(
            message["mode"],
            reference=message.get("reference"),
            command=message.get("command"),
            result_channel=message.get("result_channel") or "stdout",
            result_file=message.get("result_file"),
            timeout=float(message.get("timeout") or _CONFIG.DEFAULT_MODEL_TIMEOUT),
        )


def substitute_tokens(template: str, sample: ModelSample) -> str:
    values = {name: repr(float(value)) for name, value in sample["Variables"].items()}
    values["SampleId"] = str(sample["Sample Id"])
    values["ExperimentId"] = str(sample["Experiment Id"])

    def replace(match: re.Match) -> str:
        token = match.group(1)
        if token not in values:
            raise ModelExecutionError(f"Unknown token '{{{token}}}' in model command")
        return values[token]

    return _TOKEN.sub(replace, template)


def parse_model_output(text: str) -> Dict[str, Any]:
    """A bare real becomes ``{"F(x)": value}``; otherwise a one-line JSON object."""
    cleaned = text.replace("\u2212", "-").strip()
    if not cleaned:
        raise ParseFailureError("Model produced no output")
    try:
        return {_CONFIG.OBJECTIVE_KEY: float(cleaned)}
    except ValueError:
        pass
    last_line = cleaned.splitlines()[-1].strip()
    try:
        document = json.loads(last_line)
    except json.JSONDecodeError:
        raise ParseFailureError(f"Cannot parse model output: {last_line[:200]!r}")
    if not isinstance(document, dict):
        raise ParseFailureError(f"Model output is not a key/value document: {last_line[:200]!r}")
    return document


def run_concurrent_model(binding: ModelBinding, sample: ModelSample, worker_id: Optional[int] = None) -> Dict[str, Any]:
    """
    Run one sample through an external command (fork/join).

    Args:
        binding: Concurrent model binding
        sample: Model input container
        worker_id: Exposed to the child through KORALI_WORKER_ID

    Returns:
        Parsed result keys

    Raises:
        NonZeroExitError, ParseFailureError, ModelTimeoutError, ModelExecutionError
    """
    args = [substitute_tokens(arg, sample) for arg in shlex.split(binding.command)]
    env = dict(os.environ)
    if worker_id is not None:
        env[WORKER_ID_ENV_VAR] = str(worker_id)
    result_path = substitute_tokens(binding.result_file, sample) if binding.result_channel == "file" else None

    logger.debug(f"Launching {args} for sample {sample['Sample Id']}")
    try:
        completed = subprocess.run(args, capture_output=True, text=True, timeout=binding.timeout, env=env)
    except subprocess.TimeoutExpired:
        raise ModelTimeoutError(f"Model exceeded {binding.timeout}s for sample {sample['Sample Id']}")
    except OSError as e:
        raise ModelExecutionError(f"Cannot launch {args[0]!r}: {e}")

    if completed.returncode != 0:
        stderr_tail = (completed.stderr or "").strip()[-500:]
        raise NonZeroExitError(f"Model exited with status {completed.returncode}: {stderr_tail}")

    if result_path is None:
        return parse_model_output(completed.stdout)
    try:
        with open(result_path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise ParseFailureError(f"Result file {result_path!r} not readable: {e}")
    finally:
        if os.path.exists(result_path):
            os.remove(result_path)
    return parse_model_output(text)


def evaluate_sample(binding: ModelBinding, sample: ModelSample, worker_id: Optional[int] = None) -> Dict[str, Any]:
    """Run the bound model on one sample and return its result keys."""
    if binding.mode == CONCURRENT:
        return run_concurrent_model(binding, sample, worker_id)
    function = binding.resolve()
    returned = function(sample)
    return sample.results(returned)

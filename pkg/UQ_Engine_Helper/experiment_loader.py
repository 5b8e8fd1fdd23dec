"""
Experiment file loading for UQ Engine Helper package.
Reads JSON experiment files, applies seed precedence and names experiments
after their file stem.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

from utils.config import SEED_ENV_VAR

from .config import Config
from .config_validator import config_validate
from .engine import Experiment
from .exceptions import TypeMismatchError, ValidationError

logger = logging.getLogger(__name__)


class ExperimentLoader:
    """Loads experiment files into validated experiments."""

    def __init__(self, config: Optional[Config] = None):
        self.config = config or Config()

    def validate_file(self, path: Path) -> None:
        """Validate extension and size."""
        if path.suffix.lstrip(".").lower() not in self.config.SUPPORTED_EXTENSIONS:
            raise ValidationError(f"Unsupported experiment file type: {path.name}")
        if not path.is_file():
            raise ValidationError(f"Experiment file not found: {path}")
        if path.stat().st_size > self.config.MAX_EXPERIMENT_FILE_SIZE_MB * 1024 * 1024:
            raise ValidationError(f"File size exceeds {self.config.MAX_EXPERIMENT_FILE_SIZE_MB} MB limit")

    def read_tree(self, path: Union[str, Path]) -> Dict[str, Any]:
        path = Path(path)
        self.validate_file(path)
        try:
            with open(path, "r", encoding="utf-8") as handle:
                tree = json.load(handle)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path.name}: invalid JSON at line {e.lineno}: {e.msg}")
        if not isinstance(tree, dict):
            raise TypeMismatchError("", "subtree", tree)
        logger.debug(f"Read experiment file {path}")
        return tree

    @staticmethod
    def resolve_seed(tree: Dict[str, Any], seed: Optional[int] = None) -> Optional[int]:
        """Seed by precedence: explicit argument, then KORALI_SEED, then the file."""
        if seed is not None:
            return seed
        from_env = os.environ.get(SEED_ENV_VAR)
        if from_env:
            try:
                return int(from_env)
            except ValueError:
                raise TypeMismatchError(f"${SEED_ENV_VAR}", "64-bit unsigned integer", from_env)
        return tree.get("Random Seed")

    def load_settings(self, path: Union[str, Path], seed: Optional[int] = None) -> Dict[str, Any]:
        """Validated settings of one file with the seed precedence applied."""
        tree = self.read_tree(path)
        resolved = self.resolve_seed(tree, seed)
        if resolved is not None:
            tree["Random Seed"] = resolved
        return config_validate(tree)

    def load(
        self,
        path: Union[str, Path],
        seed: Optional[int] = None,
        results_root: Optional[Union[str, Path]] = None,
        model: Optional[Callable] = None,
    ) -> Experiment:
        path = Path(path)
        settings = self.load_settings(path, seed)
        experiment = Experiment(settings, name=path.stem, model=model, results_root=results_root)
        logger.info(f"Loaded experiment '{experiment.name}' from {path}")
        return experiment

    def load_many(
        self,
        paths: List[Union[str, Path]],
        seed: Optional[int] = None,
        results_root: Optional[Union[str, Path]] = None,
    ) -> List[Experiment]:
        stems = [Path(p).stem for p in paths]
        duplicates = sorted({s for s in stems if stems.count(s) > 1})
        if duplicates:
            raise ValidationError(f"Experiment files must have distinct names: {', '.join(duplicates)}")
        return [self.load(p, seed, results_root) for p in paths]

"""
Read-only navigation of a results root: Experiment -> checkpoints / summary,
plus benchmark timelines.
"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

from utils.config import RESULTS_ROOT

from .checkpoint import CheckpointStore, checkpoint_load, resolve_checkpoint_path
from .config import Config
from .exceptions import CheckpointIoError

logger = logging.getLogger(__name__)


class ResultsBrowser:
    """Lists experiments, checkpoints and timelines under a results root."""

    def __init__(self, root: Optional[Union[str, Path]] = None, config: Optional[Config] = None):
        """
        Args:
            root: Results root. If None, uses RESULTS_ROOT
            config: Application constants
        """
        self.root = Path(root or RESULTS_ROOT)
        self.config = config or Config()

    def path_exists(self) -> bool:
        return self.root.is_dir()

    def _is_experiment(self, path: Path) -> bool:
        return path.is_dir() and (
            (path / self.config.SUMMARY_FILE).exists() or (path / self.config.LATEST_POINTER).exists()
        )

    def get_experiments(self) -> List[str]:
        """
        Experiment directories directly under the root, or one level down
        (benchmarks keep theirs under ``bench/``).

        Returns:
            Paths relative to the root, sorted
        """
        if not self.path_exists():
            logger.warning(f"Results root not accessible: {self.root}")
            return []
        found = []
        for item in self.root.iterdir():
            if self._is_experiment(item):
                found.append(item.name)
            elif item.is_dir():
                found.extend(f"{item.name}/{sub.name}" for sub in item.iterdir() if self._is_experiment(sub))
        found.sort()
        logger.debug(f"Found {len(found)} experiment(s) under {self.root}")
        return found

    def experiment_dir(self, experiment: str) -> Path:
        return self.root / experiment

    def get_checkpoints(self, experiment: str) -> List[int]:
        return CheckpointStore(self.experiment_dir(experiment)).generations()

    def latest_checkpoint(self, experiment: str) -> Optional[Path]:
        return CheckpointStore(self.experiment_dir(experiment)).latest()

    def resolve_checkpoint(self, target: Union[str, Path]) -> Path:
        """
        State file for ``target``: an existing state file, pointer or experiment
        directory, or else an experiment name relative to the root.
        """
        path = Path(target)
        if not path.exists():
            path = self.experiment_dir(str(target))
        state_file = resolve_checkpoint_path(path)
        if not state_file.is_file():
            raise CheckpointIoError(f"No checkpoint found for '{target}' (looked for {state_file})")
        return state_file

    def load_summary(self, experiment: str) -> pd.DataFrame:
        path = self.experiment_dir(experiment) / self.config.SUMMARY_FILE
        if not path.exists():
            return pd.DataFrame()
        return pd.read_csv(path)

    def load_checkpoint(self, experiment: str, generation: Optional[int] = None) -> dict:
        store = CheckpointStore(self.experiment_dir(experiment))
        target = store.path_for(generation) if generation is not None else store.latest_pointer
        return checkpoint_load(target)

    def get_timelines(self) -> List[Path]:
        if not self.path_exists():
            return []
        return sorted(self.root.rglob("*timeline.csv"))

    @staticmethod
    def load_timeline(path: Union[str, Path]) -> pd.DataFrame:
        return pd.read_csv(path)

"""
Per-generation state files of one experiment directory.

A state file is canonical JSON (sorted keys, compact separators) of
``{"format_version", "checksum", "payload"}`` where the checksum is the
SHA-256 of the canonical payload. The ``latest`` pointer holds the file
name of the newest complete checkpoint and is replaced atomically.
"""

import hashlib
import json
import logging
import os
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from .config import Config
from .exceptions import CheckpointIoError, CorruptCheckpointError, VersionMismatchError

logger = logging.getLogger(__name__)

_CONFIG = Config()
_STATE_FILE = re.compile(r"^gen(\d{5})\.state$")


def canonical_json(document: Any) -> bytes:
    return json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode("utf-8")


def encode_checkpoint(payload: Dict[str, Any]) -> bytes:
    body = canonical_json(payload)
    return canonical_json({
        "format_version": _CONFIG.CHECKPOINT_FORMAT_VERSION,
        "checksum": hashlib.sha256(body).hexdigest(),
        "payload": payload,
    }) + b"\n"


def decode_checkpoint(data: bytes, source: str = "<bytes>") -> Dict[str, Any]:
    """
    Verify and unpack a state file.

    Raises:
        CorruptCheckpointError: Not parseable, incomplete or checksum mismatch
        VersionMismatchError: Written by an incompatible format version
    """
    try:
        document = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptCheckpointError(f"{source}: not a readable checkpoint ({e})")
    if not isinstance(document, dict) or not {"format_version", "checksum", "payload"} <= set(document):
        raise CorruptCheckpointError(f"{source}: checkpoint fields missing")
    if document["format_version"] != _CONFIG.CHECKPOINT_FORMAT_VERSION:
        raise VersionMismatchError(
            f"{source}: format version {document['format_version']}, expected {_CONFIG.CHECKPOINT_FORMAT_VERSION}"
        )
    payload = document["payload"]
    if hashlib.sha256(canonical_json(payload)).hexdigest() != document["checksum"]:
        raise CorruptCheckpointError(f"{source}: checksum mismatch")
    return payload


def _write_atomic(path: Path, data: bytes) -> None:
    temp = path.with_name(path.name + ".tmp")
    with open(temp, "wb") as handle:
        handle.write(data)
        handle.flush()
        os.fsync(handle.fileno())
    os.replace(temp, path)


class CheckpointStore:
    """State files, ``latest`` pointer and retention for one experiment directory."""

    def __init__(self, directory: Union[str, Path], keep: int = 0):
        self.directory = Path(directory)
        self.keep = keep

    def path_for(self, generation: int) -> Path:
        return self.directory / _CONFIG.CHECKPOINT_PATTERN.format(generation)

    @property
    def latest_pointer(self) -> Path:
        return self.directory / _CONFIG.LATEST_POINTER

    def generations(self) -> List[int]:
        if not self.directory.is_dir():
            return []
        found = (_STATE_FILE.match(p.name) for p in self.directory.iterdir())
        return sorted(int(m.group(1)) for m in found if m)

    def save(self, generation: int, payload: Dict[str, Any]) -> Path:
        """Write ``gen#####.state`` for a completed generation, then move ``latest`` to it."""
        path = self.path_for(generation)
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            _write_atomic(path, encode_checkpoint(payload))
            _write_atomic(self.latest_pointer, (path.name + "\n").encode("utf-8"))
        except OSError as e:
            raise CheckpointIoError(f"Cannot write checkpoint {path}: {e}")
        logger.info(f"Checkpoint written: {path}")
        self._apply_retention()
        return path

    def _apply_retention(self) -> None:
        if not self.keep:
            return
        for generation in self.generations()[:-self.keep]:
            self.path_for(generation).unlink(missing_ok=True)
            logger.debug(f"Removed old checkpoint for generation {generation}")

    def latest(self) -> Optional[Path]:
        if not self.latest_pointer.exists():
            return None
        name = self.latest_pointer.read_text(encoding="utf-8").strip()
        return self.directory / name if name else None

    def discard_after(self, generation: int) -> None:
        """Remove state files of generations later than ``generation`` and move ``latest`` back."""
        for later in self.generations():
            if later > generation:
                self.path_for(later).unlink(missing_ok=True)
                logger.info(f"Discarded stale checkpoint of generation {later}")
        if generation < 0:
            self.latest_pointer.unlink(missing_ok=True)
        elif self.path_for(generation).exists() and self.latest() != self.path_for(generation):
            try:
                _write_atomic(self.latest_pointer, (self.path_for(generation).name + "\n").encode("utf-8"))
            except OSError as e:
                raise CheckpointIoError(f"Cannot move checkpoint pointer in {self.directory}: {e}")


def resolve_checkpoint_path(path: Union[str, Path]) -> Path:
    """Accept an experiment directory, a ``latest`` pointer or a state file."""
    path = Path(path)
    if path.is_dir():
        path = path / _CONFIG.LATEST_POINTER
    if path.name == _CONFIG.LATEST_POINTER:
        if not path.exists():
            raise CheckpointIoError(f"No checkpoint pointer at {path}")
        name = path.read_text(encoding="utf-8").strip()
        if not name:
            raise CorruptCheckpointError(f"{path}: empty pointer")
        path = path.parent / name
    return path


def checkpoint_load(path: Union[str, Path]) -> Dict[str, Any]:
    """Payload of the checkpoint at ``path`` (file, pointer or directory)."""
    state_file = resolve_checkpoint_path(path)
    try:
        data = state_file.read_bytes()
    except OSError as e:
        raise CheckpointIoError(f"Cannot read checkpoint {state_file}: {e}")
    return decode_checkpoint(data, str(state_file))

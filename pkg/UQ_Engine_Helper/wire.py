"""
Length-prefixed message frames between the engine and worker processes.

A frame is a 4-byte big-endian body length followed by a UTF-8 JSON body
``{"version": 1, "kind": <kind>, ...}``. Each kind has a fixed set of
required fields checked on both ends.
"""

import json
import logging
import socket
import struct
from typing import Any, Dict, Optional

from .exceptions import FrameError

logger = logging.getLogger(__name__)

WIRE_VERSION = 1
HEADER = struct.Struct(">I")
MAX_FRAME_BYTES = 64 * 1024 * 1024

REQUIRED_FIELDS = {
    "assign": ("experiment_id", "sample_id", "parameters", "variables", "model"),
    "result": ("experiment_id", "sample_id", "result", "error"),
    "ready": ("worker_id",),
    "stop": (),
}


def check_payload(payload: Dict[str, Any]) -> Dict[str, Any]:
    """Raise FrameError unless the payload matches its kind's schema."""
    if not isinstance(payload, dict):
        raise FrameError(f"Frame body must be an object, got {type(payload).__name__}")
    if payload.get("version") != WIRE_VERSION:
        raise FrameError(f"Unsupported frame version {payload.get('version')!r}")
    kind = payload.get("kind")
    if kind not in REQUIRED_FIELDS:
        raise FrameError(f"Unknown frame kind {kind!r}")
    missing = [name for name in REQUIRED_FIELDS[kind] if name not in payload]
    if missing:
        raise FrameError(f"Frame '{kind}' missing fields: {', '.join(missing)}")
    return payload


def _jsonable(value: Any) -> Any:
    if hasattr(value, "tolist"):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} cannot be sent in a frame")


def encode_frame(kind: str, **fields: Any) -> bytes:
    payload = check_payload({"version": WIRE_VERSION, "kind": kind, **fields})
    body = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=_jsonable).encode("utf-8")
    return HEADER.pack(len(body)) + body


def decode_body(body: bytes) -> Dict[str, Any]:
    try:
        payload = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FrameError(f"Malformed frame body: {e}")
    return check_payload(payload)


def _read_exact(sock: socket.socket, size: int) -> Optional[bytes]:
    chunks = []
    remaining = size
    while remaining:
        chunk = sock.recv(remaining)
        if not chunk:
            return None
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def send_frame(sock: socket.socket, kind: str, **fields: Any) -> None:
    sock.sendall(encode_frame(kind, **fields))


def read_frame(sock: socket.socket) -> Optional[Dict[str, Any]]:
    """Next frame, or ``None`` on a clean end of stream."""
    header = _read_exact(sock, HEADER.size)
    if header is None:
        return None
    (length,) = HEADER.unpack(header)
    if length > MAX_FRAME_BYTES:
        raise FrameError(f"Frame of {length} bytes exceeds limit")
    body = _read_exact(sock, length)
    if body is None:
        raise FrameError("Stream ended inside a frame")
    return decode_body(body)

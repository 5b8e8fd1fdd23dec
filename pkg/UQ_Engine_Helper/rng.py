"""
Deterministic, serializable random number streams.

Every stream is a numpy ``Generator`` over a ``PCG64`` bit generator seeded
from ``SeedSequence(seed, spawn_key=(name_key,))`` where ``name_key`` is the
first 8 bytes of ``sha256(name)`` read big-endian. Two streams with the same
seed but different names therefore never share state.

Serialized form (``to_dict``)::

    {"algorithm": "PCG64", "name": <str>, "seed": <uint64>,
     "state": {"state": <uint128>, "inc": <uint128>},
     "has_uint32": <0|1>, "uinteger": <uint32>}

``to_bytes`` is the canonical JSON encoding of that mapping (sorted keys,
no whitespace, UTF-8).
"""

import hashlib
import json
import logging
from typing import Any, Dict

import numpy as np

logger = logging.getLogger(__name__)

ALGORITHM_ID = "PCG64"
MAX_SEED = 2 ** 64


def name_key(name: str) -> int:
    """Stable 64-bit key for a stream name."""
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "big")


class RngStream:
    """A named, single-owner random stream with exact state round-trip."""

    def __init__(self, seed: int, name: str):
        if not 0 <= int(seed) < MAX_SEED:
            raise ValueError(f"Seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.name = name
        sequence = np.random.SeedSequence(self.seed, spawn_key=(name_key(name),))
        self._bit_generator = np.random.PCG64(sequence)
        self.generator = np.random.Generator(self._bit_generator)

    # Draw helpers used across the package
    def normal(self, loc: float = 0.0, scale: float = 1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def standard_normal(self, size=None):
        return self.generator.standard_normal(size)

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self.generator.uniform(low, high, size)

    def random(self, size=None):
        return self.generator.random(size)

    def multinomial(self, n: int, pvals):
        return self.generator.multinomial(n, pvals)

    def to_dict(self) -> Dict[str, Any]:
        state = self._bit_generator.state
        return {
            "algorithm": ALGORITHM_ID,
            "name": self.name,
            "seed": self.seed,
            "state": {
                "state": int(state["state"]["state"]),
                "inc": int(state["state"]["inc"]),
            },
            "has_uint32": int(state["has_uint32"]),
            "uinteger": int(state["uinteger"]),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RngStream":
        if data.get("algorithm") != ALGORITHM_ID:
            raise ValueError(f"Unsupported RNG algorithm: {data.get('algorithm')!r}")
        stream = cls(data["seed"], data["name"])
        stream._bit_generator.state = {
            "bit_generator": ALGORITHM_ID,
            "state": {"state": int(data["state"]["state"]), "inc": int(data["state"]["inc"])},
            "has_uint32": int(data["has_uint32"]),
            "uinteger": int(data["uinteger"]),
        }
        return stream

    def to_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode("utf-8")

    @classmethod
    def from_bytes(cls, payload: bytes) -> "RngStream":
        return cls.from_dict(json.loads(payload.decode("utf-8")))

    def __repr__(self) -> str:
        return f"RngStream(name={self.name!r}, seed={self.seed})"

"""Seeded, portable random streams.

All randomness in the package flows through PCG64 generators created here.
A stream is identified by a root seed plus a tuple of string/int labels
(e.g. ``stream(seed, "fields")`` or ``stream(seed, "glauber", prep)``);
labels are hashed with SHA-256 into the PCG64 seed material, so every
(condition, purpose) pair gets an independent, reproducible stream and
results do not depend on call order or platform.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream", "stream_seed"]


def stream_seed(seed: int, *labels: str | int) -> int:
    """Derive a 128-bit integer seed from a root seed and purpose labels."""
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode())
    return int.from_bytes(h.digest()[:16], "little")


def stream(seed: int, *labels: str | int) -> np.random.Generator:
    """Independent PCG64 generator for (seed, *labels)."""
    return np.random.Generator(np.random.PCG64(stream_seed(seed, *labels)))

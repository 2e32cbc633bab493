"""Deterministic named RNG streams.

All randomness in a run flows from one master seed. Independent consumers
(parameter init, samplers, proposals, ...) get their own stream, derived by
hashing the stream name into the seed sequence, so adding a consumer never
shifts the draws seen by another.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream_sequence(master_seed: int, name: str) -> np.random.SeedSequence:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence([int(master_seed)] + words)


def named_stream(master_seed: int, name: str) -> np.random.Generator:
    """Generator for stream ``name`` derived from ``master_seed``."""
    return np.random.default_rng(stream_sequence(master_seed, name))

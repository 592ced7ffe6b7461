"""Seeded random streams.

Every run owns a small family of independent streams, one per label
("algorithm", "metrics", "tune", ...). Streams are Philox (counter based)
generators keyed from ``(seed, crc32(label))`` so that the sample path of
one stream never depends on how much another stream was consumed.
"""

from __future__ import annotations

import zlib

import numpy as np

ALGORITHM = "algorithm"
METRICS = "metrics"
TUNING = "tune"
INSTANCE = "instance"


def stream(seed: int, label: str = ALGORITHM) -> np.random.Generator:
    """Return the generator for ``label`` under ``seed``."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence([int(seed), zlib.crc32(label.encode("utf-8"))])
    return np.random.Generator(np.random.Philox(ss))


def derived_seed(seed: int, label: str, index: int = 0) -> int:
    """A deterministic child seed, e.g. for tuning replicas of a run seed."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(label.encode("utf-8")), int(index)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])

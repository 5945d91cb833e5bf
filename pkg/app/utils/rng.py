"""Seed derivation for reproducible per-node, per-round random streams.

Every random draw in a run comes from a generator built here, so results do not
depend on call order or on how many worker threads share a round.
"""

import zlib
from typing import Union

import numpy as np

SeedPart = Union[int, str]


def _as_entropy(part: SeedPart) -> int:
    if isinstance(part, str):
        # crc32 is stable across processes, unlike hash()
        return zlib.crc32(part.encode("utf-8")) & 0xFFFFFFFF
    if part < 0:
        raise ValueError(f"Seed parts must be non-negative, got {part}")
    return int(part)


def derive_seed(*parts: SeedPart) -> int:
    """Combine seed parts into one 64-bit seed."""
    sequence = np.random.SeedSequence([_as_entropy(p) for p in parts])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(*parts: SeedPart) -> np.random.Generator:
    """Generator seeded from the combined parts."""
    return np.random.default_rng(np.random.SeedSequence([_as_entropy(p) for p in parts]))

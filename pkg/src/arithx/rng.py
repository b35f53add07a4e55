"""Seeded random streams.

Every consumer asks for a substream keyed by ``(seed, *keys)``; the key is
hashed by numpy's SeedSequence and drives a counter-based Philox generator,
so trial ``i`` sees the same numbers whether trials run serially or not.
"""

import numpy as np

RNG_NAME = "philox4x64+seedsequence/v1"


def substream(seed: int, *keys: int) -> np.random.Generator:
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def rademacher(rng: np.random.Generator, k: int) -> np.ndarray:
    return rng.integers(0, 2, size=k) * 2 - 1


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit integer seed for callees that take a plain seed."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF, *(int(k) for k in keys)]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0] >> np.uint64(1))

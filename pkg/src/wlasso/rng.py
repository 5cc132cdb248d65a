"""Reproducible random streams.

All randomness in the package flows through Philox, a counter-based
generator whose output is identical across platforms for a given key.
A 64-bit seed keys the root stream; replicate ``k`` of a simulation uses
the substream obtained by jumping the root ``k + 1`` times, so replicate
streams never overlap and can be regenerated independently of execution
order (worker pools included).
"""

import numpy as np

__all__ = ["root_rng", "replicate_rng"]


def root_rng(seed: int) -> np.random.Generator:
    """Stream used for one-off draws (design matrix, signal pattern)."""
    return np.random.Generator(np.random.Philox(key=seed))


def replicate_rng(seed: int, k: int) -> np.random.Generator:
    """Substream owned by replicate ``k`` (0-based)."""
    if k < 0:
        raise ValueError("replicate index must be nonnegative")
    return np.random.Generator(np.random.Philox(key=seed).jumped(k + 1))

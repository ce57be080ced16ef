"""Deterministic random streams.

Monte Carlo draws use one counter-based Philox substream per draw, keyed by
(seed, draw index). Aggregates computed from the draws are therefore identical
whether the draws are evaluated serially, in any order, or in parallel.
"""

import numpy as np

_UINT64_MAX = 2**64 - 1


def substream(seed: int, index: int) -> np.random.Generator:
    """Return the generator for draw ``index`` of the stream keyed by ``seed``."""
    if not 0 <= seed <= _UINT64_MAX:
        raise ValueError(f"seed must be in [0, 2**64): got {seed}")
    if not 0 <= index <= _UINT64_MAX:
        raise ValueError(f"draw index must be in [0, 2**64): got {index}")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))

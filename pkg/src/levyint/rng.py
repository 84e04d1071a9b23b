"""Counter-based random streams.

Every random draw in this package comes from a Philox stream addressed by
the tuple (seed, path_index, component, purpose).  The 128-bit Philox key
encodes (seed, purpose, component) and the 256-bit counter starts at
path_index * 2**128, so any stream can be opened directly without touching
its neighbours.  Paths are therefore reproducible and may be generated in
any order, or split across processes, with bit-identical results.
"""
from __future__ import annotations

import numpy as np

# purpose codes; keep stable, they are part of the reproducibility contract
BROWNIAN = 0
JUMPS = 1
INTEGRAND = 2
BASIS = 3
CASE = 4

_MASK64 = (1 << 64) - 1


def stream(seed: int, path_index: int, component: int = 0,
           purpose: int = 0) -> np.random.Generator:
    """Open the generator addressed by (seed, path_index, component, purpose)."""
    if path_index < 0:
        raise ValueError("path_index must be nonnegative")
    key = np.array(
        [seed & _MASK64, ((purpose << 48) | (component & 0xFFFFFFFF)) & _MASK64],
        dtype=np.uint64,
    )
    counter = np.array([0, 0, path_index & _MASK64, path_index >> 64],
                       dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))

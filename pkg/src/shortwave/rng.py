"""Counter-based per-index random streams.

Stream i of a run seeded s is Philox keyed by the 128-bit word (s << 64) | i,
so sample i's draws depend only on (s, i) -- never on worker count, chunking,
or evaluation order.  The derivation scheme is the contract; Philox is the
implementation detail behind it.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def per_index_uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """u_i in [0, 1) for indices start..start+count-1 of the given seed."""
    out = np.empty(count, dtype=np.float64)
    base = (int(seed) & _MASK64) << 64
    for j in range(count):
        bg = np.random.Philox(key=base | ((start + j) & _MASK64))
        out[j] = np.random.Generator(bg).random()
    return out


def uniform_open_interval(seed: int, count: int, lo: float, hi: float) -> np.ndarray:
    """count samples uniform on [lo, hi), one independent stream per index."""
    return lo + (hi - lo) * per_index_uniforms(seed, 0, count)

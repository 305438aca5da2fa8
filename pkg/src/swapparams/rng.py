"""Counter-based normal draws.

Every draw is a pure function of ``(seed, stream, index, block, component)``
so a sample or path produces the same numbers whether it is computed alone,
in a chunk, or on another thread. The mixer is SplitMix64's finalizer,
applied once per key field.
"""
from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

# stream ids keep independent consumers from sharing draws
STREAM_EPSILON = 1
STREAM_SIM = 2


def _mix(x):
    x = x + _GOLDEN
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def hash_keys(seed: int, stream: int, index, block: int, component: int) -> np.ndarray:
    index = np.atleast_1d(np.asarray(index)).astype(np.uint64)
    h = _mix(np.full(index.shape, seed & 0xFFFFFFFFFFFFFFFF, dtype=np.uint64))
    for field in (np.uint64(stream), index, np.uint64(block), np.uint64(component)):
        h = _mix(h ^ _mix(np.broadcast_to(field, h.shape).astype(np.uint64)))
    return h


def uniforms(seed: int, stream: int, index, block: int, component: int) -> np.ndarray:
    """Uniforms in the open interval (0, 1) with 53 random bits."""
    h = hash_keys(seed, stream, index, block, component)
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normals(seed: int, stream: int, index, block: int, component: int) -> np.ndarray:
    return ndtri(uniforms(seed, stream, index, block, component))

"""Counter-based SplitMix64 streams.

Trial ``i`` under master seed ``M`` gets seed ``mix(M + (i+1) * GAMMA)``, and
its j-th uniform is ``mix(seed + (j+1) * GAMMA) >> 11`` scaled to [0, 1).
Scalar and vectorised engines read the same numbers, so a batch run
reproduces the corresponding scalar runs draw for draw.
"""

from __future__ import annotations

import numpy as np

__all__ = ["GAMMA", "mix64", "SplitMix64", "trial_seeds", "uniform_at"]

GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_SCALE = 2.0**-53

_G = np.uint64(GAMMA)
_U1 = np.uint64(_M1)
_U2 = np.uint64(_M2)


def _mix_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finaliser on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _U1
        z = (z ^ (z >> np.uint64(27))) * _U2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Minimal scalar generator exposing ``random()``."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK
        self.draws = 0

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & _MASK
        self.draws += 1
        return _mix_int(self.state)

    def random(self) -> float:
        return (self.next_u64() >> 11) * _SCALE


def trial_seeds(master_seed: int, indices) -> np.ndarray:
    """Per-trial seeds for the given trial indices."""
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(int(master_seed) & _MASK) + (idx + np.uint64(1)) * _G
    return mix64(z)


def uniform_at(seeds: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """The ``counters``-th uniform (0-based) of each seed's stream."""
    with np.errstate(over="ignore"):
        z = np.asarray(seeds, dtype=np.uint64) + (np.asarray(counters, dtype=np.uint64) + np.uint64(1)) * _G
    return (mix64(z) >> np.uint64(11)).astype(np.float64) * _SCALE

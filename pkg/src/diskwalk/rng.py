"""Counter-based splittable RNG used by every Monte Carlo kernel.

Each trajectory owns an independent stream keyed by (seed, task id,
trajectory id).  A stream is a Weyl sequence through the splitmix64
finalizer: output(i) = mix64(key + i * GOLDEN).  This is stateless and
counter-based, so the values a trajectory sees depend only on its key,
never on scheduling or on how many worker threads execute the run.
"""

from __future__ import annotations

import numpy as np
from numba import njit

UINT64_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_INV_2_53 = 1.1102230246251565e-16  # 2**-53
TWO_PI = 6.283185307179586


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def stream_key(seed, task_id, traj_id):
    """Derive the 64-bit stream key for one trajectory."""
    k = mix64(np.uint64(seed) + GOLDEN)
    k = mix64(k ^ (np.uint64(task_id) + GOLDEN))
    return mix64(k ^ (np.uint64(traj_id) + GOLDEN))


@njit(cache=True, inline="always")
def u01(key, ctr):
    """Uniform double in [0, 1) at position ctr of the stream."""
    return float(mix64(key + ctr * GOLDEN) >> np.uint64(11)) * _INV_2_53


def stream_key_py(seed: int, task_id: int, traj_id: int) -> int:
    """Pure-python mirror of stream_key (for tests and slow paths)."""
    return int(stream_key(np.uint64(seed), np.uint64(task_id), np.uint64(traj_id)))


def uniforms(seed: int, task_id: int, traj_id: int, n: int, start: int = 0) -> np.ndarray:
    """Vector of n stream values, starting at counter `start`."""
    key = np.uint64(stream_key_py(seed, task_id, traj_id))
    ctr = (np.arange(start, start + n, dtype=np.uint64) * GOLDEN + key)
    z = ctr.copy()
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z ^= z >> np.uint64(31)
    return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53

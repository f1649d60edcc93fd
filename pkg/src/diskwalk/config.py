"""Core value types shared by every module: points, run configs, estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Points of the complex plane travel as python/numpy complex scalars.
PlanePoint = complex

#: Trajectories per scheduling task.  Fixed so the task partition (and with it
#: every RNG stream) depends only on the sample count, never on thread count.
SHARD_SIZE = 16384

#: A run whose censored or geometry-error fraction exceeds this fails loudly.
MAX_BAD_FRACTION = 1e-6

#: Step cap for half-plane runs.  Exit times from a half-plane have
#: P(T > n) ~ c(y)/sqrt(n) with c(y) ~ 2(1+y) empirically, so the cap must
#: be enormous for the censored fraction to stay below MAX_BAD_FRACTION
#: even from y ~ 32; block jumps make the cost of a deep excursion
#: logarithmic in the cap, which keeps this affordable.
HALFPLANE_MAX_STEPS = 10**17


def plane_point(re: float, im: float) -> PlanePoint:
    """Validated construction of a plane point (finite coordinates only)."""
    if not (math.isfinite(re) and math.isfinite(im)):
        raise ValueError(f"plane point coordinates must be finite, got ({re}, {im})")
    return complex(re, im)


@dataclass(frozen=True)
class WalkConfig:
    """Parameters of one Monte Carlo run."""

    h: float = 1.0
    seed: int = 0
    samples: int = 10**6
    max_steps: int = 10**7

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError(f"step radius h must be positive and finite, got {self.h}")
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")

    def with_(self, **kw) -> "WalkConfig":
        d = {"h": self.h, "seed": self.seed, "samples": self.samples, "max_steps": self.max_steps}
        d.update(kw)
        return WalkConfig(**d)


@dataclass(frozen=True)
class MCEstimate:
    """Mean, standard error and bookkeeping counts of one Monte Carlo average.

    n counts every trajectory of the run; mean and stderr are over the
    n - censored trajectories that actually exited.
    """

    mean: float
    stderr: float
    n: int
    censored: int = 0

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be >= 0")
        if self.censored > self.n:
            raise ValueError("censored count cannot exceed sample count")

    @property
    def n_effective(self) -> int:
        return self.n - self.censored

    def combined_stderr(self, other: "MCEstimate") -> float:
        return math.hypot(self.stderr, other.stderr)


@dataclass
class WelfordState:
    """Numerically stable one-pass mean/variance accumulator."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add(self, x: float) -> None:
        self.n += 1
        d = x - self.mean
        self.mean += d / self.n
        self.m2 += d * (x - self.mean)

    def merge(self, other: "WelfordState") -> None:
        """In-place merge; callers must merge in a fixed task order."""
        if other.n == 0:
            return
        if self.n == 0:
            self.n, self.mean, self.m2 = other.n, other.mean, other.m2
            return
        n = self.n + other.n
        d = other.mean - self.mean
        self.mean += d * other.n / n
        self.m2 += other.m2 + d * d * self.n * other.n / n
        self.n = n

    def estimate(self, censored: int = 0) -> MCEstimate:
        if self.n == 0:
            return MCEstimate(math.nan, 0.0, censored, censored)
        if self.n == 1:
            return MCEstimate(self.mean, 0.0, 1 + censored, censored)
        var = self.m2 / (self.n - 1)
        return MCEstimate(self.mean, math.sqrt(max(var, 0.0) / self.n),
                          self.n + censored, censored)


def merge_shard_moments(stats: np.ndarray) -> WelfordState:
    """Reduce per-shard (n, mean, m2) rows in shard order."""
    out = WelfordState()
    for i in range(stats.shape[0]):
        s = WelfordState(int(stats[i, 0]), float(stats[i, 1]), float(stats[i, 2]))
        out.merge(s)
    return out


def shard_layout(samples: int) -> list[tuple[int, int]]:
    """(task_id, size) pairs covering `samples` trajectories."""
    n_shards = (samples + SHARD_SIZE - 1) // SHARD_SIZE
    out = []
    for t in range(n_shards):
        lo = t * SHARD_SIZE
        out.append((t, min(SHARD_SIZE, samples - lo)))
    return out
